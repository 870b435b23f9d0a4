use std::collections::HashSet;

use ideocascade::generator::{generate_dataset, sampling, GenConfig, GraphSpec};
use ideocascade::rng::stream;
use ideocascade::ItemId;

/// Checks every activation of every cascade: one seed at t=0, no node twice,
/// and each later adoption attributed to a predecessor that adopted in the
/// previous round.
fn check_invariants(cfg: &GenConfig) -> usize {
    let d = generate_dataset(cfg).unwrap();
    let mut checked = 0;
    let mut offset = 0;
    for i in 0..d.items.len() {
        let cascade = d.log.cascade(ItemId::from(i));
        let via = &d.via[offset..offset + cascade.len()];
        offset += cascade.len();
        let mut seen = HashSet::new();
        for (a, exposer) in cascade.iter().zip(via) {
            assert!(seen.insert(a.node), "item {i}: node {} adopted twice", a.node);
            match exposer {
                None => assert_eq!(a.t, 0, "item {i}: unattributed adoption after the seed"),
                Some(v) => {
                    assert!(d.graph.has_edge(*v, a.node), "item {i}: {v} does not reach {}", a.node);
                    let tv = cascade.iter().find(|b| b.node == *v).map(|b| b.t);
                    assert_eq!(tv, Some(a.t - 1), "item {i}: exposer {v} not active one round earlier");
                }
            }
        }
        assert_eq!(cascade.iter().filter(|a| a.t == 0).count(), 1);
        checked += cascade.len();
    }
    checked
}

#[test]
fn cascades_on_complete_graph_are_causally_supported() {
    let n = check_invariants(&GenConfig { n_items: 10_000, seed: 1, ..GenConfig::default() });
    assert!(n > 10_000);
}

#[test]
fn cascades_on_preferential_attachment_graph_are_causally_supported() {
    let cfg = GenConfig {
        n_items: 10_000,
        seed: 2,
        graph: GraphSpec::BarabasiAlbert { n: 100, m: 10 },
        ..GenConfig::default()
    };
    check_invariants(&cfg);
}

#[test]
fn interest_prior_puts_92_percent_above_one_half() {
    let mut rng = stream(17, &[1], 0);
    let n = 200_000;
    let above = (0..n).filter(|_| sampling::beta(0.9, 0.1, &mut rng) > 0.5).count();
    let frac = above as f64 / n as f64;
    // exact upper tail P(theta > 0.5) = 0.92274
    assert!((frac - 0.92).abs() <= 0.01, "{frac}");
}

#[test]
fn sparse_polarities_stay_inside_unit_interval() {
    let mut rng = stream(3, &[2], 0);
    for _ in 0..100_000 {
        let x = sampling::beta(1.0 / 16.0, 1.0 / 16.0, &mut rng);
        assert!((0.0..=1.0).contains(&x) && x.is_finite());
    }
}
