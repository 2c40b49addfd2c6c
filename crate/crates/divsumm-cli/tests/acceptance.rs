//! Go/no-go gate for the whole workspace. Each test is one numbered
//! acceptance criterion; the harness prints one pass/fail line per
//! criterion. Tolerances and runtime ceilings sit in the assertions.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use divsumm::argument::{ArgumentBackend, ArgumentBackendConfig};
use divsumm::cluster::{agglomerative, kmeans_pp_seed, kmeans_restarts, lloyd_from_seeds, KMeansOptions};
use divsumm::corpus::{load_topic, topic_sentences, Document, Topic};
use divsumm::embed::{EmbeddingBackendConfig, EmbeddingVector, SimilarityMatrix};
use divsumm::rng::{RandomSource, Xorshift64Star};
use divsumm::rouge::{rouge1, tokenize};
use divsumm::{
    brute_force_select, diversity_loss, greedy_diverse_select, run_pipeline, Backends,
    ClusteringKind, SelectionInstance, SummaryConfig, SummaryMode,
};

fn fixture() -> &'static Path {
    Path::new(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../testdata/mini/harbor-bill"
    ))
}

/// Similarity mass over ordered pairs of the subset, diagonal excluded.
/// Recomputed here from scratch so the gate does not trust library
/// internals.
fn mass_of(sim: &SimilarityMatrix, subset: &[usize]) -> f64 {
    let mut mass = 0.0;
    for &i in subset {
        for &j in subset {
            if i != j {
                mass += sim.get(i, j);
            }
        }
    }
    mass
}

fn objective_of(salience: &[f64], sim: &SimilarityMatrix, subset: &[usize], lambda: f64) -> f64 {
    -subset.iter().map(|&i| salience[i]).sum::<f64>() + lambda * mass_of(sim, subset)
}

/// Random symmetric similarity matrix with entries in [0, 1) and unit
/// diagonal.
fn random_instance(rng: &mut Xorshift64Star, n: usize) -> (Vec<f64>, SimilarityMatrix) {
    let salience: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let sim = SimilarityMatrix::from_fn::<()>(n, |i, j| {
        Ok(if i == j { 1.0 } else { rng.next_f64() })
    })
    .unwrap();
    (salience, sim)
}

/// Instance made of duplicate groups: a constant similarity inside each
/// group, zero across groups. This is the shape the diversity penalty
/// exists to handle, and the greedy rule is exactly optimal on it.
fn duplicate_group_instance(seed: u64) -> (Vec<f64>, SimilarityMatrix) {
    let mut rng = Xorshift64Star::seeded(seed ^ 0x5eed);
    let n_groups = 2 + rng.below(3);
    let mut group_of = Vec::new();
    let mut group_sim = Vec::new();
    for g in 0..n_groups {
        group_sim.push(0.7 + 0.3 * rng.next_f64());
        for _ in 0..1 + rng.below(3) {
            group_of.push(g);
        }
    }
    let n = group_of.len();
    let salience: Vec<f64> = (0..n).map(|_| rng.next_f64()).collect();
    let sim = SimilarityMatrix::from_fn::<()>(n, |i, j| {
        Ok(if i == j {
            1.0
        } else if group_of[i] == group_of[j] {
            group_sim[group_of[i]]
        } else {
            0.0
        })
    })
    .unwrap();
    (salience, sim)
}

fn pts(coords: &[&[f64]]) -> Vec<EmbeddingVector> {
    coords
        .iter()
        .map(|c| EmbeddingVector::new(c.to_vec()).unwrap())
        .collect()
}

/// Feeds a fixed value sequence, cycling when exhausted.
struct Script {
    values: Vec<u64>,
    pos: usize,
}

impl RandomSource for Script {
    fn next_u64(&mut self) -> u64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}

fn synthetic_topic(seed: u64) -> Topic {
    const VOCAB: [&str; 24] = [
        "river", "council", "budget", "harbor", "trade", "policy", "growth", "survey", "bridge",
        "tariff", "market", "quarry", "festival", "route", "permit", "ballot", "levy", "depot",
        "canal", "ledger", "manor", "orchard", "plaza", "quay",
    ];
    let mut rng = Xorshift64Star::seeded(seed);
    let n_docs = 1 + rng.below(3);
    let mut documents = Vec::new();
    for d in 0..n_docs {
        let n_sentences = 1 + rng.below(7);
        let mut text = String::new();
        for _ in 0..n_sentences {
            let n_words = 1 + rng.below(40);
            let words: Vec<&str> = (0..n_words).map(|_| VOCAB[rng.below(VOCAB.len())]).collect();
            text.push_str(&words.join(" "));
            text.push_str(". ");
        }
        documents.push(Document {
            id: format!("doc{d:02}"),
            text: text.trim_end().to_string(),
            source_order: d,
        });
    }
    Topic {
        name: format!("synthetic-{seed}"),
        documents,
        references: Vec::new(),
    }
}

#[test]
fn criterion_01_loss_evaluator_hand_values() {
    let start = Instant::now();

    let mut instance = SelectionInstance {
        salience: vec![0.8, 0.2],
        sim: SimilarityMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]),
        ground_truth: Some(vec![true, false]),
    };
    let loss = diversity_loss(&instance).unwrap();
    assert!(
        (loss - 0.60629).abs() <= 1e-5,
        "loss {loss} is off the hand-computed 0.60629"
    );

    // with no pair similarity the loss reduces to the fit term alone
    instance.sim = SimilarityMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let bce_sum = -(0.8f64.ln()) - (1.0f64 - 0.2).ln();
    let fit_only = diversity_loss(&instance).unwrap();
    assert!(
        (fit_only - bce_sum).abs() <= 1e-12,
        "fit-only loss {fit_only} vs independent BCE sum {bce_sum}"
    );

    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn criterion_02_optimal_similarity_mass_never_rises_with_lambda() {
    let start = Instant::now();
    let lambdas = [0.0, 0.5, 1.0, 2.0];

    let mut instances = 0;
    let mut violations = 0;
    for seed in 0..70u64 {
        let mut rng = Xorshift64Star::seeded(seed);
        let n = 4 + (seed as usize % 9);
        let (salience, sim) = random_instance(&mut rng, n);
        for k in [2usize, 3, 4] {
            instances += 1;
            let mut previous = f64::INFINITY;
            for lambda in lambdas {
                let (subset, _) = brute_force_select(&salience, &sim, k, lambda).unwrap();
                let mass = mass_of(&sim, &subset);
                if mass > previous + 1e-9 {
                    violations += 1;
                }
                previous = mass;
            }
        }
    }
    assert!(instances >= 200, "only {instances} instances exercised");
    assert_eq!(violations, 0);
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn criterion_03_greedy_tracks_the_exhaustive_optimum() {
    let start = Instant::now();

    let mut positive_cases = 0;
    for seed in 0..500u64 {
        let (salience, sim) = duplicate_group_instance(seed);
        let n = salience.len();
        let count = 2 + (seed as usize % (n.min(5) - 1).max(1));
        let count = count.min(n);

        let lambda = [0.5, 1.0, 2.0][seed as usize % 3];
        let (_, optimum) = brute_force_select(&salience, &sim, count, lambda).unwrap();
        let picked = greedy_diverse_select(&salience, &sim, count, lambda).unwrap();
        let greedy_value = objective_of(&salience, &sim, &picked, lambda);
        if optimum > 1e-9 {
            positive_cases += 1;
            assert!(
                greedy_value <= 1.25 * optimum + 1e-9,
                "seed {seed}: greedy {greedy_value} exceeds 1.25 x optimum {optimum}"
            );
        }

        // with the penalty off both rules must land on the same set
        let (best_set, _) = brute_force_select(&salience, &sim, count, 0.0).unwrap();
        let picked_flat = greedy_diverse_select(&salience, &sim, count, 0.0).unwrap();
        assert_eq!(picked_flat, best_set, "seed {seed}: sets differ at lambda 0");
    }
    assert!(
        positive_cases > 50,
        "only {positive_cases} positive-optimum cases; the bound check barely ran"
    );
    assert!(start.elapsed().as_secs() < 60);
}

#[test]
fn criterion_04_rouge_matches_the_multiset_oracle() {
    const VOCAB: [&str; 12] = [
        "tide", "vote", "plan", "dock", "road", "farm", "mill", "camp", "fort", "gate", "well",
        "yard",
    ];
    let mut rng = Xorshift64Star::seeded(41);
    let draw = |rng: &mut Xorshift64Star| -> Vec<String> {
        let len = rng.below(31);
        (0..len).map(|_| VOCAB[rng.below(VOCAB.len())].to_string()).collect()
    };

    for case in 0..1000 {
        let cand_tokens = draw(&mut rng);
        let ref_tokens = draw(&mut rng);
        let cand_text = cand_tokens.join(" ");
        let ref_text = ref_tokens.join(" ");
        assert_eq!(tokenize(&cand_text), cand_tokens);

        let mut ref_counts: HashMap<&str, usize> = HashMap::new();
        for t in &ref_tokens {
            *ref_counts.entry(t.as_str()).or_insert(0) += 1;
        }
        let mut overlap = 0usize;
        for t in &cand_tokens {
            let remaining = ref_counts.entry(t.as_str()).or_insert(0);
            if *remaining > 0 {
                *remaining -= 1;
                overlap += 1;
            }
        }

        let score = rouge1(&cand_text, &ref_text);
        assert_eq!(score.overlap_count, overlap, "case {case}");
        assert_eq!(score.candidate_tokens, cand_tokens.len());
        assert_eq!(score.reference_tokens, ref_tokens.len());
        let expect = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        assert!((score.recall - expect(overlap, ref_tokens.len())).abs() <= 1e-12);
        assert!((score.precision - expect(overlap, cand_tokens.len())).abs() <= 1e-12);
    }
}

#[test]
fn criterion_05_kmeans_seeding_descent_and_recovery() {
    // scripted rng: first draw picks index 0, the next two land at 0.5 and
    // about 0.8 of the remaining squared-distance mass, forcing 3 then 2
    let points = pts(&[&[0.0, 0.0], &[4.0, 0.0], &[0.0, 3.0], &[8.0, 6.0]]);
    let mut rng = Script {
        values: vec![0, 1u64 << 63, 7205759403792794u64 << 11],
        pos: 0,
    };
    let seeds = kmeans_pp_seed(&points, 3, &mut rng).unwrap();
    assert_eq!(seeds, vec![0, 3, 2]);

    // running Lloyd for a longer prefix never raises the final inertia
    for seed in 0..100u64 {
        let mut rng = Xorshift64Star::seeded(seed);
        let n = 8 + rng.below(20);
        let dim = 2 + rng.below(4);
        let k = 2 + rng.below(4);
        let points: Vec<EmbeddingVector> = (0..n)
            .map(|_| {
                EmbeddingVector::new((0..dim).map(|_| rng.next_f64() * 10.0).collect()).unwrap()
            })
            .collect();
        let seeds = kmeans_pp_seed(&points, k, &mut rng).unwrap();
        let mut previous = f64::INFINITY;
        for iters in 1..=8 {
            let run = lloyd_from_seeds(&points, &seeds, iters, 0.0).unwrap();
            let inertia = run.inertia.unwrap();
            assert!(
                inertia <= previous + 1e-9,
                "seed {seed}: inertia rose from {previous} to {inertia} at {iters} iterations"
            );
            previous = inertia;
        }
    }

    // two tight groups: every seed must find the 1.0-inertia split
    let points = pts(&[&[0.0, 0.0], &[0.0, 1.0], &[9.0, 0.0], &[9.0, 1.0]]);
    for seed in 0..32u64 {
        let options = KMeansOptions { seed, ..KMeansOptions::default() };
        let run = kmeans_restarts(&points, 2, &options).unwrap();
        assert!(
            (run.inertia.unwrap() - 1.0).abs() <= 1e-9,
            "seed {seed}: inertia {}",
            run.inertia.unwrap()
        );
        assert_eq!(run.labels[0], run.labels[1]);
        assert_eq!(run.labels[2], run.labels[3]);
        assert_ne!(run.labels[0], run.labels[2]);
    }
}

#[test]
fn criterion_06_agglomerative_is_deterministic_and_permutation_covariant() {
    // the close pair merges first, the far point stays alone
    let sim = SimilarityMatrix::from_rows(vec![
        vec![1.0, 0.9, 0.1],
        vec![0.9, 1.0, 0.2],
        vec![0.1, 0.2, 1.0],
    ]);
    let run = agglomerative(&sim, 2).unwrap();
    assert_eq!(run.labels, vec![0, 0, 1]);

    for seed in 0..100u64 {
        let mut rng = Xorshift64Star::seeded(seed);
        let n = 4 + rng.below(9);
        let k = 2 + rng.below(3.min(n - 1));
        let sim = SimilarityMatrix::from_fn::<()>(n, |i, j| {
            Ok(if i == j { 1.0 } else { rng.next_f64() })
        })
        .unwrap();

        let first = agglomerative(&sim, k).unwrap();
        for _ in 0..4 {
            assert_eq!(agglomerative(&sim, k).unwrap(), first, "seed {seed}");
        }

        // permuted input must yield the identically permuted partition
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.below(i + 1));
        }
        let permuted =
            SimilarityMatrix::from_fn::<()>(n, |a, b| Ok(sim.get(perm[a], perm[b]))).unwrap();
        let second = agglomerative(&permuted, k).unwrap();
        for a in 0..n {
            for b in 0..n {
                assert_eq!(
                    second.labels[a] == second.labels[b],
                    first.labels[perm[a]] == first.labels[perm[b]],
                    "seed {seed}: permutation broke the partition at ({a}, {b})"
                );
            }
        }
    }
}

#[test]
fn criterion_07_no_summary_ever_breaks_its_budget() {
    let backends = Backends {
        embedding: EmbeddingBackendConfig::HashedTfidf { dim: 64 },
        ..Backends::default()
    };
    let shapes: [(SummaryMode, ClusteringKind, bool); 5] = [
        (SummaryMode::Full, ClusteringKind::KMeans, true),
        (SummaryMode::Full, ClusteringKind::Agglomerative, true),
        (SummaryMode::OnlyArguments, ClusteringKind::Agglomerative, true),
        (SummaryMode::Mix, ClusteringKind::KMeans, true),
        (SummaryMode::Diverse, ClusteringKind::KMeans, true),
    ];

    let mut violations = 0;
    for seed in 0..200u64 {
        let topic = synthetic_topic(seed);
        for budget in [220usize, 330, 440, 660] {
            for (mode, clustering, cluster_in_full_mode) in shapes {
                let nonarg_budget = (budget / 3).max(1);
                let config = SummaryConfig {
                    mode,
                    clustering,
                    cluster_in_full_mode,
                    total_budget_chars: budget,
                    mix_nonarg_budget_chars: nonarg_budget,
                    seed,
                    ..SummaryConfig::default()
                };
                let output = run_pipeline(&topic, &config, &backends).unwrap();
                let summary = &output.summary;
                if summary.char_len > budget || summary.text.chars().count() != summary.char_len {
                    violations += 1;
                }
                if mode == SummaryMode::Mix {
                    let arg_budget = budget - nonarg_budget;
                    if output.stats.arg_part_chars.unwrap() > arg_budget
                        || output.stats.nonarg_part_chars.unwrap() > nonarg_budget
                    {
                        violations += 1;
                    }
                }
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn criterion_08_bundled_corpus_reproduces_the_pipeline_shape() {
    let start = Instant::now();
    let topic = load_topic(fixture()).unwrap();
    let sentences = topic_sentences(&topic);

    // a score file marking exactly ten sentences drives exactly ten picks
    let marked: Vec<usize> = (0..sentences.len()).step_by(6).collect();
    assert_eq!(marked.len(), 10);
    let mut score_file = tempfile::NamedTempFile::new().unwrap();
    for s in &sentences {
        let score = if marked.contains(&s.global_index) { 0.9 } else { 0.1 };
        writeln!(
            score_file,
            "{}",
            serde_json::json!({"key": s.key(), "score": score})
        )
        .unwrap();
    }
    score_file.flush().unwrap();
    let scored_backends = Backends {
        classifier: Some(ArgumentBackendConfig {
            backend: ArgumentBackend::ScoreFile { path: score_file.path().to_path_buf() },
            threshold: 0.5,
        }),
        ..Backends::default()
    };
    let config = SummaryConfig {
        mode: SummaryMode::OnlyArguments,
        total_budget_chars: 5000,
        ..SummaryConfig::default()
    };
    let output = run_pipeline(&topic, &config, &scored_backends).unwrap();
    assert_eq!(output.stats.n_arguments, Some(10));
    assert_eq!(output.summary.sentence_indices, marked);

    // agglomerative grouping at k = 5 yields exactly five clusters
    let config = SummaryConfig {
        clustering: ClusteringKind::Agglomerative,
        k: 5,
        ..SummaryConfig::default()
    };
    let output = run_pipeline(&topic, &config, &Backends::default()).unwrap();
    assert_eq!(output.stats.n_clusters, Some(5));
    assert_eq!(output.stats.n_candidates, 5);

    // the stock pipeline stays under budget and spans several sources
    let output = run_pipeline(&topic, &SummaryConfig::default(), &Backends::default()).unwrap();
    assert!(!output.summary.text.is_empty());
    assert!(output.summary.char_len <= 660);
    let mut doc_ids: Vec<&str> = output
        .summary
        .sentence_indices
        .iter()
        .map(|&i| sentences[i].doc_id.as_str())
        .collect();
    doc_ids.sort_unstable();
    doc_ids.dedup();
    assert!(doc_ids.len() >= 2, "summary drew from {doc_ids:?} only");

    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn criterion_09_experiment_matrix_is_reproducible_row_for_row() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.json");
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.tsv"));
        let result = Command::new(env!("CARGO_BIN_EXE_summarize"))
            .args([
                "run",
                "--config",
                config,
                "--topics",
                fixture().to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "0",
                "--no-timing",
            ])
            .output()
            .unwrap();
        assert!(
            result.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&result.stderr)
        );
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "reruns with one seed diverged");

    let rows: Vec<&str> = outputs[0]
        .lines()
        .filter(|l| l.starts_with("harbor-bill\t"))
        .collect();
    assert_eq!(rows.len(), 6);
    let mut labels: Vec<&str> = rows.iter().map(|r| r.split('\t').nth(1).unwrap()).collect();
    labels.sort_unstable();
    assert_eq!(
        labels,
        vec!["args+agglomerative", "args+kmeans", "full+kmeans", "mix-33.3", "mix-50", "mix-66.7"]
    );
    for row in rows {
        let cells: Vec<&str> = row.split('\t').collect();
        for cell in [cells[2], cells[3]] {
            let (_, frac) = cell.split_once('.').expect("scores carry a decimal point");
            assert_eq!(frac.len(), 4, "cell {cell:?} is not 4-decimal");
        }
    }
}

#[test]
fn criterion_10_penalty_pushes_selection_across_duplicate_groups() {
    // one document: three near-copies (high salience), two near-copies
    // (slightly lower), one unrelated low-salience straggler
    let text = "\
Solar panel arrays along the coast cut household energy bills sharply last year. \
Solar panel arrays along the coast cut household energy bills sharply this year. \
Solar panel arrays along the coast cut household energy bills sharply every year. \
Harbor ferries moved record passenger counts during the spring festival weekend. \
Harbor ferries moved record passenger counts during the autumn festival weekend. \
Bakery permit rules changed quietly.";
    let topic = Topic {
        name: "duplicate-groups".to_string(),
        documents: vec![Document { id: "d1".to_string(), text: text.to_string(), source_order: 0 }],
        references: Vec::new(),
    };
    let scores = [0.92, 0.91, 0.90, 0.85, 0.84, 0.10];
    let mut score_file = tempfile::NamedTempFile::new().unwrap();
    for (i, score) in scores.iter().enumerate() {
        writeln!(
            score_file,
            "{}",
            serde_json::json!({"key": format!("d1#{i}"), "score": score})
        )
        .unwrap();
    }
    score_file.flush().unwrap();
    let backends = Backends {
        embedding: EmbeddingBackendConfig::HashedTfidf { dim: 256 },
        classifier: Some(ArgumentBackendConfig {
            backend: ArgumentBackend::ScoreFile { path: score_file.path().to_path_buf() },
            threshold: 0.5,
        }),
    };
    let select = |weight: f64| -> Vec<usize> {
        let config = SummaryConfig {
            mode: SummaryMode::Diverse,
            select_count: Some(2),
            diversity_weight: weight,
            ..SummaryConfig::default()
        };
        run_pipeline(&topic, &config, &backends).unwrap().summary.sentence_indices
    };

    // without the penalty both picks come from the top duplicate group
    assert_eq!(select(0.0), vec![0, 1]);

    // with it the two picks never share a group
    let diverse = select(1.0);
    let group = |i: usize| match i {
        0..=2 => 0,
        3..=4 => 1,
        _ => 2,
    };
    assert_eq!(diverse.len(), 2);
    assert_ne!(
        group(diverse[0]),
        group(diverse[1]),
        "lambda 1 still picked {diverse:?} from one group"
    );
}
