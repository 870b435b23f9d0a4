//! Tab-separated file formats.
//!
//! | file        | row                                   |
//! |-------------|---------------------------------------|
//! | graph       | `src  dst` (dst follows src)          |
//! | items       | `item_id  g_1 .. g_K`                 |
//! | activations | `t  item_id  node_id`                 |
//! | embeddings  | header, then `node_id  theta_1..K  phi_1..K` |
//!
//! Lines starting with `#` and blank lines are skipped by every reader.
//! External ids are arbitrary strings; they are densified on ingestion and
//! restored on output.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cascade::{Activation, ActivationLog, ItemId};
use crate::error::{Error, Result};
use crate::eval::{EvalReport, ScoredPair};
use crate::graph::{DirectedGraph, NodeId};
use crate::model::{EmbeddingTable, ItemTopics};
use crate::scalar::Scalar;
use crate::trainer::{TrainExample, TrainTrace};

/// Bidirectional map between external string ids and dense indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdMap {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl IdMap {
    /// Ids `"0" .. "n-1"` mapping to themselves.
    pub fn identity(n: usize) -> Self {
        Self::from_names((0..n).map(|i| i.to_string()).collect()).expect("distinct names")
    }

    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i as u32).is_some() {
                return Err(Error::Validation(format!("duplicate id {n:?}")));
            }
        }
        Ok(IdMap { names, index })
    }

    fn intern(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// When every id is a non-negative integer, renumbers dense ids in
    /// ascending numeric order; returns the permutation old -> new.
    fn canonicalize_numeric(&mut self) -> Option<Vec<u32>> {
        let nums: Option<Vec<u64>> = self.names.iter().map(|n| n.parse::<u64>().ok()).collect();
        let nums = nums?;
        let mut order: Vec<usize> = (0..nums.len()).collect();
        order.sort_by_key(|&i| nums[i]);
        let mut perm = vec![0u32; nums.len()];
        for (new, &old) in order.iter().enumerate() {
            perm[old] = new as u32;
        }
        let names = order.iter().map(|&i| self.names[i].clone()).collect();
        *self = IdMap::from_names(names).expect("ids were distinct");
        Some(perm)
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Yields `(line_number, fields)` of data lines.
fn data_lines(path: &Path) -> Result<impl Iterator<Item = Result<(usize, Vec<String>)>>> {
    let reader = open(path)?;
    let p = path.to_path_buf();
    Ok(reader.lines().enumerate().filter_map(move |(i, line)| match line {
        Err(e) => Some(Err(Error::io(&p, e))),
        Ok(l) => {
            let t = l.trim_end_matches('\r');
            if t.trim().is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.split('\t').map(str::to_string).collect())))
            }
        }
    }))
}

fn disp(path: &Path) -> String {
    path.display().to_string()
}

/// Formats `x` with 9 significant digits, without exponent or trailing zeros.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn write_all(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Reads a `src<TAB>dst` edge list. Numeric ids are densified in ascending
/// numeric order, other ids in order of first appearance.
pub fn read_graph(path: &Path) -> Result<(DirectedGraph, IdMap)> {
    let p = disp(path);
    let mut ids = IdMap::default();
    let mut edges = Vec::new();
    for row in data_lines(path)? {
        let (line, f) = row?;
        if f.len() != 2 {
            return Err(Error::parse(&p, line, format!("expected 2 columns, found {}", f.len())));
        }
        if f[0] == f[1] {
            return Err(Error::parse(&p, line, format!("self-loop on node {}", f[0])));
        }
        edges.push((ids.intern(&f[0]), ids.intern(&f[1])));
    }
    if let Some(perm) = ids.canonicalize_numeric() {
        for e in &mut edges {
            *e = (perm[e.0 as usize], perm[e.1 as usize]);
        }
    }
    let g = DirectedGraph::with_node_count(
        ids.len(),
        edges.into_iter().map(|(a, b)| (a as usize, b as usize)),
    )?;
    Ok((g, ids))
}

pub fn write_graph(path: &Path, graph: &DirectedGraph, ids: &IdMap) -> Result<()> {
    write_all(path, |w| {
        for (u, v) in graph.edges() {
            writeln!(w, "{}\t{}", ids.name(u.index()), ids.name(v.index()))?;
        }
        Ok(())
    })
}

/// Writes `dense<TAB>external` rows.
pub fn write_id_map(path: &Path, ids: &IdMap) -> Result<()> {
    write_all(path, |w| {
        for (i, n) in ids.names().iter().enumerate() {
            writeln!(w, "{i}\t{n}")?;
        }
        Ok(())
    })
}

pub fn read_id_map(path: &Path) -> Result<IdMap> {
    let p = disp(path);
    let mut names = Vec::new();
    for row in data_lines(path)? {
        let (line, f) = row?;
        if f.len() != 2 || f[0].parse::<usize>().ok() != Some(names.len()) {
            return Err(Error::parse(&p, line, "expected `dense<TAB>external` rows numbered from 0"));
        }
        names.push(f[1].clone());
    }
    IdMap::from_names(names)
}

const SUM_TOLERANCE: f64 = 1e-6;

/// Reads topic vectors. `k` fixes the expected width; otherwise it is taken
/// from the first row. Rows must sum to one within 1e-6 and are rescaled to
/// sum to one when they deviate by more than rounding noise.
pub fn read_items<T: Scalar>(path: &Path, k: Option<usize>) -> Result<(Vec<ItemTopics<T>>, IdMap)> {
    let p = disp(path);
    let mut ids = IdMap::default();
    let mut items = Vec::new();
    let mut width = k;
    for row in data_lines(path)? {
        let (line, f) = row?;
        let k = *width.get_or_insert(f.len().saturating_sub(1));
        if k == 0 || f.len() != k + 1 {
            return Err(Error::parse(&p, line, format!("expected {} columns, found {}", k + 1, f.len())));
        }
        let mut gamma = Vec::with_capacity(k);
        for (c, s) in f[1..].iter().enumerate() {
            let x: f64 = s
                .parse()
                .map_err(|_| Error::parse(&p, line, format!("g{} = {s:?} is not a number", c + 1)))?;
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::parse(&p, line, format!("g{} = {s} is negative or not finite", c + 1)));
            }
            gamma.push(x);
        }
        let sum: f64 = gamma.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::parse(&p, line, format!("topic weights sum to {sum}, not 1")));
        }
        if (sum - 1.0).abs() > 4.0 * f64::EPSILON * k as f64 {
            gamma.iter_mut().for_each(|x| *x /= sum);
        }
        let n_before = ids.len();
        ids.intern(&f[0]);
        if ids.len() == n_before {
            return Err(Error::parse(&p, line, format!("duplicate item id {:?}", f[0])));
        }
        let topics = ItemTopics::new(gamma.into_iter().map(T::lit).collect())
            .map_err(|e| Error::parse(&p, line, e.to_string()))?;
        items.push(topics);
    }
    Ok((items, ids))
}

/// Writes topic vectors with shortest round-trip precision.
pub fn write_items<T: Scalar>(path: &Path, items: &[ItemTopics<T>], ids: &IdMap) -> Result<()> {
    write_all(path, |w| {
        for (i, g) in items.iter().enumerate() {
            write!(w, "{}", ids.name(i))?;
            for x in g.gamma() {
                write!(w, "\t{}", x.to_f64().unwrap())?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// Reads `t<TAB>item<TAB>node` rows, resolving ids against `items` and `nodes`.
pub fn read_activations(path: &Path, items: &IdMap, nodes: &IdMap) -> Result<ActivationLog> {
    let p = disp(path);
    let mut entries = Vec::new();
    let mut seen: HashMap<(u32, u32), usize> = HashMap::new();
    for row in data_lines(path)? {
        let (line, f) = row?;
        if f.len() != 3 {
            return Err(Error::parse(&p, line, format!("expected 3 columns, found {}", f.len())));
        }
        let t: u32 = f[0]
            .parse()
            .map_err(|_| Error::parse(&p, line, format!("t = {:?} is not a non-negative integer", f[0])))?;
        let item = items
            .get(&f[1])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown item {:?}", f[1])))?;
        let node = nodes
            .get(&f[2])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown node {:?}", f[2])))?;
        if let Some(first) = seen.insert((item, node), line) {
            return Err(Error::parse(
                &p,
                line,
                format!("node {:?} already adopted item {:?} at line {first}", f[2], f[1]),
            ));
        }
        entries.push(Activation { t, item: ItemId(item), node: NodeId(node) });
    }
    ActivationLog::new(entries, items.len())
}

pub fn write_activations(path: &Path, log: &ActivationLog, items: &IdMap, nodes: &IdMap) -> Result<()> {
    write_all(path, |w| {
        for a in log.entries() {
            writeln!(w, "{}\t{}\t{}", a.t, items.name(a.item.index()), nodes.name(a.node.index()))?;
        }
        Ok(())
    })
}

fn embedding_header(k: usize) -> Vec<String> {
    let mut h = vec!["node_id".to_string()];
    h.extend((1..=k).map(|i| format!("theta_{i}")));
    h.extend((1..=k).map(|i| format!("phi_{i}")));
    h
}

pub fn write_embeddings<T: Scalar>(path: &Path, emb: &EmbeddingTable<T>, nodes: &IdMap) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "{}", embedding_header(emb.k()).join("\t"))?;
        for u in 0..emb.node_count() {
            let id = NodeId::from(u);
            write!(w, "{}", nodes.name(u))?;
            for x in emb.theta(id).iter().chain(emb.phi(id)) {
                write!(w, "\t{}", fmt_sig9(x.to_f64().unwrap()))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}

/// Reads an embedding table whose rows cover exactly the nodes of `nodes`.
/// `k` fixes the dimension; otherwise it is taken from the header.
pub fn read_embeddings<T: Scalar>(path: &Path, k: Option<usize>, nodes: &IdMap) -> Result<EmbeddingTable<T>> {
    let p = disp(path);
    let mut rows = data_lines(path)?;
    let (hline, header) = match rows.next() {
        Some(r) => r?,
        None => return Err(Error::parse(&p, 1, "missing header")),
    };
    let k = match k {
        Some(k) => k,
        None => header.iter().filter(|h| h.starts_with("theta_")).count(),
    };
    if k == 0 {
        return Err(Error::parse(&p, hline, "missing column theta_1"));
    }
    let expected = embedding_header(k);
    for (i, name) in expected.iter().enumerate() {
        if header.get(i) != Some(name) {
            return Err(Error::parse(&p, hline, format!("missing column {name}")));
        }
    }
    if header.len() > expected.len() {
        return Err(Error::parse(&p, hline, format!("unexpected column {}", header[expected.len()])));
    }
    let n = nodes.len();
    let mut theta = vec![T::zero(); n * k];
    let mut phi = vec![T::zero(); n * k];
    let mut filled = vec![false; n];
    for row in rows {
        let (line, f) = row?;
        if f.len() < expected.len() {
            return Err(Error::parse(&p, line, format!("missing column {}", expected[f.len()])));
        }
        if f.len() > expected.len() {
            return Err(Error::parse(&p, line, "too many columns"));
        }
        let u = nodes
            .get(&f[0])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown node {:?}", f[0])))? as usize;
        if std::mem::replace(&mut filled[u], true) {
            return Err(Error::parse(&p, line, format!("duplicate row for node {:?}", f[0])));
        }
        for (c, s) in f[1..].iter().enumerate() {
            let x: f64 = s
                .parse()
                .map_err(|_| Error::parse(&p, line, format!("{} = {s:?} is not a number", expected[c + 1])))?;
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::parse(&p, line, format!("{} = {s} outside [0, 1]", expected[c + 1])));
            }
            if c < k {
                theta[u * k + c] = T::lit(x);
            } else {
                phi[u * k + c - k] = T::lit(x);
            }
        }
    }
    if let Some(u) = filled.iter().position(|f| !f) {
        return Err(Error::parse(&p, 0, format!("no row for node {:?}", nodes.name(u))));
    }
    EmbeddingTable::new(k, theta, phi)
}

/// Per-epoch objective trace.
pub fn write_trace(path: &Path, trace: &TrainTrace) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "restart\tepoch\tlearning_rate\texamples\tpositives\tmean_loglik")?;
        for r in &trace.epochs {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.restart,
                r.epoch,
                fmt_sig9(r.learning_rate),
                r.examples,
                r.positives,
                fmt_sig9(r.mean_loglik)
            )?;
        }
        Ok(())
    })
}

/// One row per restart, flagging the selected one.
pub fn write_restarts(path: &Path, trace: &TrainTrace) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "restart\tfinal_mean_loglik\ttrain_loglik\tselected")?;
        for r in &trace.restarts {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                r.restart,
                fmt_sig9(r.final_mean_loglik),
                fmt_sig9(r.train_loglik),
                u8::from(r.restart == trace.best_restart)
            )?;
        }
        Ok(())
    })
}

/// Metrics per fold plus `mean` and `std` rows. Wall-clock time is kept out
/// of this file so reports are reproducible byte for byte.
pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "fold\ttrain_items\ttest_items\ttest_pairs\ttest_positives\tauc_roc\tavg_precision")?;
        for f in &report.folds {
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                f.fold,
                f.train_items,
                f.test_items,
                f.test_pairs,
                f.test_positives,
                fmt_sig9(f.auc),
                fmt_sig9(f.ap)
            )?;
        }
        let (am, asd) = report.auc_mean_std();
        let (pm, psd) = report.ap_mean_std();
        writeln!(w, "mean\t\t\t\t\t{}\t{}", fmt_sig9(am), fmt_sig9(pm))?;
        writeln!(w, "std\t\t\t\t\t{}\t{}", fmt_sig9(asd), fmt_sig9(psd))?;
        Ok(())
    })
}

pub fn write_timing(path: &Path, report: &EvalReport) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "fold\tseconds")?;
        for f in &report.folds {
            writeln!(w, "{}\t{:.3}", f.fold, f.seconds)?;
        }
        Ok(())
    })
}

pub fn write_roc(path: &Path, roc: &[(f64, f64)]) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "fpr\ttpr")?;
        for (fpr, tpr) in roc {
            writeln!(w, "{}\t{}", fmt_sig9(*fpr), fmt_sig9(*tpr))?;
        }
        Ok(())
    })
}

/// Reads `item<TAB>v<TAB>u` rows to score. Labels are unknown and set to false.
pub fn read_triples(path: &Path, items: &IdMap, nodes: &IdMap) -> Result<Vec<TrainExample>> {
    let p = disp(path);
    let mut out = Vec::new();
    for row in data_lines(path)? {
        let (line, f) = row?;
        if f.len() != 3 {
            return Err(Error::parse(&p, line, format!("expected 3 columns, found {}", f.len())));
        }
        let item = items
            .get(&f[0])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown item {:?}", f[0])))?;
        let v = nodes
            .get(&f[1])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown node {:?}", f[1])))?;
        let u = nodes
            .get(&f[2])
            .ok_or_else(|| Error::parse(&p, line, format!("unknown node {:?}", f[2])))?;
        out.push(TrainExample { item: ItemId(item), v: NodeId(v), u: NodeId(u), y: false });
    }
    Ok(out)
}

pub fn write_scores(path: &Path, scored: &[ScoredPair], items: &IdMap, nodes: &IdMap) -> Result<()> {
    write_all(path, |w| {
        writeln!(w, "item\tv\tu\tscore")?;
        for s in scored {
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                items.name(s.item.index()),
                nodes.name(s.v.index()),
                nodes.name(s.u.index()),
                fmt_sig9(s.score)
            )?;
        }
        Ok(())
    })
}
