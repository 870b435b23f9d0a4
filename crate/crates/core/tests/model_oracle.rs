//! The mixture likelihood against a brute-force evaluation that enumerates
//! attitudes explicitly, plus the Jensen bound of the factorized positives.

mod common;

#[test]
fn exact_loglik_matches_enumeration_on_small_instances() {
    let (checked, worst) = common::oracle_sweep(11);
    assert!(checked > 2000);
    assert!(worst <= 1e-10, "max difference {worst}");
}

#[test]
fn prior_weighted_positives_never_exceed_exact_positives() {
    let worst = common::jensen_sweep(5, 100);
    assert!(worst <= 1e-12, "bound exceeded by {worst}");
}

#[test]
fn jensen_gap_closes_for_single_exposers() {
    use ideocascade::model::{approx_cascade_loglik_parts, exact_cascade_loglik, PositiveWeighting};
    use ideocascade::{DirectedGraph, EmbeddingTable, ExposurePrior, ItemTopics};
    // a path: every active node has exactly one exposer
    let g = DirectedGraph::from_edges([(0, 1), (1, 2), (2, 3)]).unwrap();
    let e = common::exposures(&g, &[Some(0), Some(1), Some(2), None]);
    let emb = EmbeddingTable::new(1, vec![0.6, 0.7, 0.8, 0.9], vec![0.1, 0.4, 0.6, 0.9]).unwrap();
    let topics = ItemTopics::new(vec![1.0]).unwrap();
    let prior = ExposurePrior::Uniform;
    let exact: f64 = exact_cascade_loglik(&e, &topics, &prior, &emb).unwrap();
    let parts = approx_cascade_loglik_parts(&e, &topics, &emb, &prior, PositiveWeighting::PriorWeighted).unwrap();
    assert!((parts.total() - exact).abs() < 1e-15);
}
