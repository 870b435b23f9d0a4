use std::fs;

use ideocascade::generator::{generate_dataset, GenConfig, GraphSpec};
use ideocascade::io::{self, IdMap};
use ideocascade::{ItemTopics, NodeId};
use proptest::prelude::*;
use tempfile::TempDir;

#[test]
fn generated_dataset_survives_files_exactly() {
    let cfg = GenConfig {
        n_items: 500,
        seed: 3,
        graph: GraphSpec::BarabasiAlbert { n: 60, m: 4 },
        ..GenConfig::default()
    };
    let d = generate_dataset(&cfg).unwrap();
    let dir = TempDir::new().unwrap();
    let nodes = IdMap::identity(d.graph.node_count());
    let items = IdMap::identity(d.items.len());
    let (gp, ip, ap, ep) = (
        dir.path().join("g.tsv"),
        dir.path().join("i.tsv"),
        dir.path().join("a.tsv"),
        dir.path().join("e.tsv"),
    );
    io::write_graph(&gp, &d.graph, &nodes).unwrap();
    io::write_items(&ip, &d.items, &items).unwrap();
    io::write_activations(&ap, &d.log, &items, &nodes).unwrap();
    io::write_embeddings(&ep, &d.truth, &nodes).unwrap();

    let (graph, nodes2) = io::read_graph(&gp).unwrap();
    let (topics, items2) = io::read_items::<f64>(&ip, Some(4)).unwrap();
    let log = io::read_activations(&ap, &items2, &nodes2).unwrap();
    let truth = io::read_embeddings::<f64>(&ep, None, &nodes2).unwrap();
    assert_eq!(graph, d.graph);
    assert_eq!(nodes2, nodes);
    assert_eq!(topics, d.items);
    assert_eq!(log, d.log);
    for (a, b) in truth.theta_all().iter().chain(truth.phi_all()).zip(d.truth.theta_all().iter().chain(d.truth.phi_all())) {
        assert!((a - b).abs() <= 1e-8);
    }

    // writing what was read reproduces the files byte for byte
    let again = dir.path().join("a2.tsv");
    io::write_activations(&again, &log, &items2, &nodes2).unwrap();
    assert_eq!(fs::read(&ap).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn string_ids_keep_first_appearance_order() {
    let dir = TempDir::new().unwrap();
    let gp = dir.path().join("g.tsv");
    fs::write(&gp, "# users\nbob\talice\nalice\tcarol\nbob\tcarol\n").unwrap();
    let (g, ids) = io::read_graph(&gp).unwrap();
    assert_eq!(ids.names(), ["bob", "alice", "carol"]);
    assert!(g.has_edge(NodeId(0), NodeId(1)));
    let out = dir.path().join("g2.tsv");
    io::write_graph(&out, &g, &ids).unwrap();
    let (g2, ids2) = io::read_graph(&out).unwrap();
    assert_eq!((g2, ids2), (g, ids));
}

#[test]
fn malformed_rows_are_located() {
    let dir = TempDir::new().unwrap();
    let ip = dir.path().join("i.tsv");
    fs::write(&ip, "a\t0.5\t0.5\nb\t0.5\n").unwrap();
    let e = io::read_items::<f64>(&ip, None).unwrap_err().to_string();
    assert!(e.contains("i.tsv:2"), "{e}");

    let ep = dir.path().join("e.tsv");
    fs::write(&ep, "node_id\ttheta_1\tphi_1\n0\t1.5\t0.2\n").unwrap();
    let e = io::read_embeddings::<f64>(&ep, None, &IdMap::identity(1)).unwrap_err().to_string();
    assert!(e.contains(":2:") && e.contains("theta_1"), "{e}");

    fs::write(&ep, "node_id\ttheta_1\ttheta_2\tphi_1\n").unwrap();
    let e = io::read_embeddings::<f64>(&ep, None, &IdMap::identity(1)).unwrap_err().to_string();
    assert!(e.contains("missing column phi_2"), "{e}");
}

proptest! {
    #[test]
    fn embeddings_round_trip_within_1e8(vals in proptest::collection::vec(0.0f64..=1.0, 12)) {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("e.tsv");
        let emb = ideocascade::EmbeddingTable::new(2, vals[..6].to_vec(), vals[6..].to_vec()).unwrap();
        let ids = IdMap::identity(3);
        io::write_embeddings(&p, &emb, &ids).unwrap();
        let back = io::read_embeddings::<f64>(&p, Some(2), &ids).unwrap();
        for (a, b) in back.theta_all().iter().chain(back.phi_all()).zip(&vals) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn topic_rows_round_trip_exactly(raw in proptest::collection::vec(0.001f64..10.0, 1..6)) {
        let dir = TempDir::new().unwrap();
        let p = dir.path().join("i.tsv");
        let items = vec![ItemTopics::normalized(raw).unwrap()];
        io::write_items(&p, &items, &IdMap::identity(1)).unwrap();
        let (back, _) = io::read_items::<f64>(&p, None).unwrap();
        prop_assert_eq!(back, items);
    }
}
