use amfpmc_core::graph::{ClassId, DrugIdx, EvalMode, TypedInteractionGraph};
use amfpmc_core::metrics::{
    average_precision, class_weights, multiclass_report, roc_auc, ScoredLabel,
};
use amfpmc_core::model::{init_model, Hyperparameters};
use amfpmc_core::phrase::{
    extract_phrase, ClassVocabulary, Grouping, InteractionSentence, KeywordPhrase,
};
use amfpmc_core::propagation::{propagate_target, PropagationConfig};
use proptest::prelude::*;

fn edges_strategy(n: usize, k: usize) -> impl Strategy<Value = Vec<(usize, usize, usize)>> {
    prop::collection::vec((0..n, 0..n, 0..k), 0..40)
}

fn build(
    n: usize,
    k: usize,
    mode: EvalMode,
    edges: &[(usize, usize, usize)],
) -> TypedInteractionGraph {
    let mut g = TypedInteractionGraph::with_drugs(n, k, mode);
    for &(a, b, c) in edges {
        if a != b
            && g.get(DrugIdx(a), DrugIdx(b)).is_none()
            && g.check_edge_class(ClassId(c)).is_ok()
        {
            g.add_interaction(DrugIdx(a), DrugIdx(b), ClassId(c))
                .unwrap();
        }
    }
    g
}

// O(P·N) pair-counting AUROC with half credit for ties.
fn brute_auroc(items: &[ScoredLabel]) -> f64 {
    let pos: Vec<f64> = items
        .iter()
        .filter(|s| s.positive)
        .map(|s| s.score)
        .collect();
    let neg: Vec<f64> = items
        .iter()
        .filter(|s| !s.positive)
        .map(|s| s.score)
        .collect();
    let mut wins = 0.0;
    for p in &pos {
        for q in &neg {
            wins += if p > q {
                1.0
            } else if p == q {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

fn scored() -> impl Strategy<Value = Vec<ScoredLabel>> {
    prop::collection::vec((0u8..20, any::<bool>()), 2..60)
        .prop_filter("both labels present", |v| {
            v.iter().any(|x| x.1) && v.iter().any(|x| !x.1)
        })
        .prop_map(|v| {
            v.into_iter()
                .map(|(s, p)| ScoredLabel::new(s as f64 / 19.0, p))
                .collect()
        })
}

proptest! {
    #[test]
    fn graph_is_symmetric_and_degrees_sum(edges in edges_strategy(8, 3)) {
        let g = build(8, 3, EvalMode::Holdout, &edges);
        let mut degree_sum = 0;
        for a in 0..8 {
            degree_sum += g.degree(DrugIdx(a));
            for b in 0..8 {
                prop_assert_eq!(g.get(DrugIdx(a), DrugIdx(b)), g.get(DrugIdx(b), DrugIdx(a)));
            }
        }
        prop_assert_eq!(degree_sum, 2 * g.n_edges());
        prop_assert_eq!(g.class_counts().iter().sum::<usize>(), g.n_edges());
    }

    #[test]
    fn propagated_targets_are_distributions(
        edges in edges_strategy(7, 4),
        a in 0usize..7, b in 0usize..7, label in 0usize..4, alpha in 0.0f64..=1.0,
        holdout in any::<bool>(),
    ) {
        prop_assume!(a != b);
        let mode = if holdout { EvalMode::Holdout } else { EvalMode::Retrospective };
        let g = build(7, 4, mode, &edges);
        let cfg = PropagationConfig::new(alpha).unwrap();
        let t = propagate_target(&g, DrugIdx(a), DrugIdx(b), ClassId(label), cfg).unwrap();
        let swapped = propagate_target(&g, DrugIdx(b), DrugIdx(a), ClassId(label), cfg).unwrap();
        prop_assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
        prop_assert_eq!(t.probs(), swapped.probs());
        // the hard label's mass never drops below 1 - alpha
        prop_assert!(t.probs()[label] >= 1.0 - alpha - 1e-12);
    }

    #[test]
    fn label_mass_is_monotone_in_alpha(edges in edges_strategy(6, 3), a1 in 0.0f64..=1.0, a2 in 0.0f64..=1.0) {
        let g = build(6, 3, EvalMode::Holdout, &edges);
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let at = |alpha| propagate_target(&g, DrugIdx(0), DrugIdx(1), ClassId(2), PropagationConfig::new(alpha).unwrap()).unwrap();
        prop_assert!(at(lo).probs()[2] >= at(hi).probs()[2] - 1e-12);
    }

    #[test]
    fn auroc_matches_pair_counting(items in scored()) {
        let fast = roc_auc(&items).unwrap();
        prop_assert!((fast - brute_auroc(&items)).abs() < 1e-12);
    }

    #[test]
    fn auroc_invariant_under_monotone_transform(items in scored()) {
        let warped: Vec<ScoredLabel> = items.iter().map(|s| ScoredLabel::new((3.0 * s.score).exp() - 7.0, s.positive)).collect();
        prop_assert!((roc_auc(&items).unwrap() - roc_auc(&warped).unwrap()).abs() < 1e-12);
        let flipped: Vec<ScoredLabel> = items.iter().map(|s| ScoredLabel::new(-s.score, s.positive)).collect();
        prop_assert!((roc_auc(&items).unwrap() + roc_auc(&flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn average_precision_in_unit_interval(items in scored()) {
        let ap = average_precision(&items).unwrap();
        prop_assert!((0.0..=1.0).contains(&ap));
    }

    #[test]
    fn micro_scores_equal_accuracy(rows in prop::collection::vec((prop::collection::vec(0.0f64..1.0, 3), 0usize..3), 4..40)) {
        let probs: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
        let truths: Vec<ClassId> = rows.iter().map(|r| ClassId(r.1)).collect();
        if let Ok(rep) = multiclass_report(&probs, &truths) {
            prop_assert_eq!(rep.micro_precision, rep.accuracy);
            prop_assert_eq!(rep.micro_recall, rep.accuracy);
            prop_assert_eq!(rep.micro_f1, rep.accuracy);
        }
    }

    #[test]
    fn balanced_weights_equalize_class_mass(counts in prop::collection::vec(0usize..50, 2..8)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let w = class_weights(&counts).unwrap();
        let total: usize = counts.iter().sum();
        let k_eff = counts.iter().filter(|&&c| c > 0).count() as f64;
        for (c, wc) in counts.iter().zip(&w) {
            if *c > 0 {
                prop_assert!((*c as f64 * wc - total as f64 / k_eff).abs() < 1e-9);
            } else {
                prop_assert_eq!(*wc, 0.0);
            }
        }
    }

    #[test]
    fn predictions_are_symmetric(seed in any::<u64>(), a in 0usize..5, b in 0usize..5) {
        prop_assume!(a != b);
        let hp = Hyperparameters { embedding_dim: 6, seed, ..Hyperparameters::default() };
        let mut m = init_model(5, 4, &hp).unwrap();
        m.b[a] = 0.3;
        m.b[b] = -1.1;
        let p = m.predict(DrugIdx(a), DrugIdx(b)).unwrap();
        prop_assert_eq!(&p, &m.predict(DrugIdx(b), DrugIdx(a)).unwrap());
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phrases_ignore_endpoint_order(verb in prop::sample::select(vec!["increase", "decrease"]), effect in "[a-z]{3,9}") {
        let text = format!("Aspirin may {verb} the {effect} activities of Warfarin.");
        let ab = extract_phrase(&InteractionSentence::new(text.clone(), "Aspirin", "Warfarin"));
        let ba = extract_phrase(&InteractionSentence::new(text, "Warfarin", "Aspirin"));
        prop_assert_eq!(ab.clone(), ba);
        if let Ok(p) = ab {
            // a normalized phrase is a fixed point when parsed back
            prop_assert_eq!(KeywordPhrase::parse(&p.to_string()).unwrap(), p);
        }
    }

    #[test]
    fn vocabulary_roundtrips(words in prop::collection::vec("[a-c]{1,2}", 1..30), top in 1usize..5) {
        let phrases: Vec<KeywordPhrase> = words.iter().map(|w| KeywordPhrase::parse(w).unwrap()).collect();
        let vocab = ClassVocabulary::build(&phrases, EvalMode::Retrospective, Grouping::TopN(top)).unwrap();
        for c in 1..vocab.n_classes() {
            if Some(ClassId(c)) == vocab.other_class() {
                continue;
            }
            let p = vocab.decode(ClassId(c)).unwrap();
            prop_assert_eq!(vocab.encode(p).unwrap(), ClassId(c));
        }
        for p in &phrases {
            let c = vocab.encode(p).unwrap();
            prop_assert!(c.0 >= 1 && c.0 < vocab.n_classes());
        }
    }
}

#[test]
fn random_scores_give_ap_near_positive_rate() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let items: Vec<ScoredLabel> = (0..20_000)
        .map(|_| ScoredLabel::new(rng.random::<f64>(), rng.random::<f64>() < 0.3))
        .collect();
    let rate = items.iter().filter(|s| s.positive).count() as f64 / items.len() as f64;
    assert!((average_precision(&items).unwrap() - rate).abs() < 0.02);
    assert!((roc_auc(&items).unwrap() - 0.5).abs() < 0.02);
}
