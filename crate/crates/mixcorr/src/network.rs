//! Association networks: threshold an estimated correlation matrix into an
//! undirected weighted graph and export it for graph tooling.
//!
//! An edge joins two variables when the estimated correlation magnitude
//! reaches the threshold; missing estimates never produce edges. Nodes are
//! kept even when isolated, so exports always carry the full variable list.

use crate::error::{Error, Result};
use crate::estimator::CorrelationMatrix;
use serde::{Deserialize, Serialize};

/// One graph node: a variable name plus an optional type tag (for example
/// the declared column kind, or a data modality label).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
}

/// One undirected edge with its signed correlation weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// An undirected association graph over the matrix's variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: Vec<Node>,
    pub threshold: f64,
    pub edges: Vec<Edge>,
}

/// Thresholds a correlation matrix into a network: pairs with estimated
/// magnitude at least `threshold` become edges (so 0 keeps every estimated
/// pair and 1 keeps only perfect correlations). Weights keep their sign.
pub fn build_network(matrix: &CorrelationMatrix, threshold: f64) -> Result<Network> {
    if !(threshold.is_finite() && (0.0..=1.0).contains(&threshold)) {
        return Err(Error::InvalidParameter(format!(
            "edge threshold must be in [0, 1], got {threshold}"
        )));
    }
    let d = matrix.dim();
    let mut edges = Vec::new();
    for i in 0..d {
        for j in (i + 1)..d {
            if let Some(v) = matrix.get(i, j) {
                if v.abs() >= threshold {
                    edges.push(Edge {
                        source: matrix.names()[i].clone(),
                        target: matrix.names()[j].clone(),
                        weight: v,
                    });
                }
            }
        }
    }
    let nodes = matrix
        .names()
        .iter()
        .map(|n| Node {
            name: n.clone(),
            tag: None,
        })
        .collect();
    Ok(Network {
        nodes,
        threshold,
        edges,
    })
}

impl Network {
    /// Attaches one type tag per node, in node order.
    pub fn set_tags(&mut self, tags: &[String]) -> Result<()> {
        if tags.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} tags for {} nodes",
                tags.len(),
                self.nodes.len()
            )));
        }
        for (node, tag) in self.nodes.iter_mut().zip(tags) {
            node.tag = Some(tag.clone());
        }
        Ok(())
    }

    /// Degree of each node, in node order.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.nodes.len()];
        let index: std::collections::HashMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        for e in &self.edges {
            deg[index[e.source.as_str()]] += 1;
            deg[index[e.target.as_str()]] += 1;
        }
        deg
    }

    /// Nodes with degree at least `min_degree`, sorted by decreasing degree
    /// and then by name.
    pub fn hubs(&self, min_degree: usize) -> Vec<(String, usize)> {
        let deg = self.degrees();
        let mut out: Vec<(String, usize)> = self
            .nodes
            .iter()
            .zip(deg)
            .filter(|(_, d)| *d >= min_degree)
            .map(|(n, d)| (n.name.clone(), d))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Edge list CSV with full-precision weights (shortest round-trip form).
    pub fn edge_csv(&self) -> String {
        let mut out = String::from("source,target,weight\n");
        for e in &self.edges {
            out.push_str(&format!("{},{},{}\n", e.source, e.target, e.weight));
        }
        out
    }

    /// GraphML document with a string `type` attribute on tagged nodes and a
    /// double `weight` attribute on every edge.
    pub fn to_graphml(&self) -> String {
        let escape = |s: &str| {
            s.replace('&', "&amp;")
                .replace('<', "&lt;")
                .replace('>', "&gt;")
                .replace('"', "&quot;")
        };
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
        out.push_str("  <key id=\"t\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n");
        out.push_str("  <key id=\"w\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
        out.push_str("  <graph id=\"associations\" edgedefault=\"undirected\">\n");
        for node in &self.nodes {
            match &node.tag {
                Some(tag) => out.push_str(&format!(
                    "    <node id=\"{}\"><data key=\"t\">{}</data></node>\n",
                    escape(&node.name),
                    escape(tag)
                )),
                None => out.push_str(&format!("    <node id=\"{}\"/>\n", escape(&node.name))),
            }
        }
        for e in &self.edges {
            out.push_str(&format!(
                "    <edge source=\"{}\" target=\"{}\"><data key=\"w\">{}</data></edge>\n",
                escape(&e.source),
                escape(&e.target),
                e.weight
            ));
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }

    /// Graphviz DOT form: the weight is the edge label and its sign is a
    /// separate attribute; isolated nodes are listed bare.
    pub fn to_dot(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\\\""));
        let mut out = String::from("graph associations {\n");
        for node in &self.nodes {
            out.push_str(&format!("  {};\n", quote(&node.name)));
        }
        for e in &self.edges {
            let sign = if e.weight < 0.0 {
                "negative"
            } else {
                "positive"
            };
            out.push_str(&format!(
                "  {} -- {} [label=\"{}\", sign={}];\n",
                quote(&e.source),
                quote(&e.target),
                e.weight,
                sign
            ));
        }
        out.push_str("}\n");
        out
    }

    /// JSON form carrying nodes, threshold, and edges; round-trips exactly.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Network> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parses an edge list CSV produced by [`Network::edge_csv`].
pub fn parse_edge_csv(text: &str) -> Result<Vec<Edge>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "source,target,weight" => {}
        _ => {
            return Err(Error::CsvParse {
                line: 1,
                message: "expected header source,target,weight".into(),
            })
        }
    }
    let mut edges = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::CsvParse {
                line: idx + 1,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let weight: f64 = fields[2].trim().parse().map_err(|_| Error::CsvParse {
            line: idx + 1,
            message: format!("non-numeric weight {:?}", fields[2]),
        })?;
        edges.push(Edge {
            source: fields[0].trim().to_string(),
            target: fields[1].trim().to_string(),
            weight,
        });
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::gen_sigma_blocks;

    fn sample_matrix() -> CorrelationMatrix {
        let names = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let mut m = CorrelationMatrix::identity(names);
        m.set(0, 1, 0.72);
        m.set(0, 2, -0.41);
        m.set(0, 3, 0.05);
        m.set(1, 2, 0.3000000000000001);
        m.set(1, 3, -0.02);
        m.set_missing(2, 3);
        m
    }

    #[test]
    fn thresholding_and_missing() {
        let m = sample_matrix();
        let net = build_network(&m, 0.3).unwrap();
        assert_eq!(net.nodes.len(), 4);
        assert_eq!(net.n_edges(), 3);
        assert!(net.edges.iter().any(|e| e.source == "a" && e.target == "c"));
        assert!(!net.edges.iter().any(|e| e.source == "c" || e.target == "d"));
        let strict = build_network(&m, 0.5).unwrap();
        assert_eq!(strict.n_edges(), 1);
        // 0 keeps every estimated pair; the missing (c,d) entry still never
        // becomes an edge. 1 keeps only perfect correlations.
        assert_eq!(build_network(&m, 0.0).unwrap().n_edges(), 5);
        assert_eq!(build_network(&m, 1.0).unwrap().n_edges(), 0);
        assert!(build_network(&m, -0.1).is_err());
        assert!(build_network(&m, 1.1).is_err());
        assert!(build_network(&m, f64::NAN).is_err());
    }

    #[test]
    fn edges_shrink_as_threshold_grows() {
        let m = sample_matrix();
        let mut prev = usize::MAX;
        for t in [0.0, 0.01, 0.1, 0.3, 0.45, 0.8] {
            let n = build_network(&m, t).unwrap().n_edges();
            assert!(n <= prev, "threshold {t} grew the edge set");
            prev = n;
        }
        // And every surviving edge at a higher threshold exists at a lower one.
        let loose = build_network(&m, 0.1).unwrap();
        let tight = build_network(&m, 0.45).unwrap();
        for e in &tight.edges {
            assert!(loose.edges.contains(e));
        }
    }

    #[test]
    fn degrees_and_hubs() {
        let net = build_network(&sample_matrix(), 0.3).unwrap();
        assert_eq!(net.degrees(), vec![2, 2, 2, 0]);
        let hubs = net.hubs(1);
        assert_eq!(hubs.len(), 3);
        assert_eq!(hubs[0].0, "a");
        assert!(net.hubs(3).is_empty());
    }

    #[test]
    fn block_truth_components_recover_blocks() {
        let blocks = [(7, 0.8), (10, 0.6), (2, 0.5), (6, 0.7), (5, 0.3)];
        let sigma = gen_sigma_blocks(&blocks).unwrap();
        let net = build_network(&sigma, 0.25).unwrap();
        // Union-find over edges; components must be exactly the five blocks.
        let d = net.nodes.len();
        let mut parent: Vec<usize> = (0..d).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let index: std::collections::HashMap<&str, usize> = net
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.name.as_str(), i))
            .collect();
        for e in &net.edges {
            let (a, b) = (
                find(&mut parent, index[e.source.as_str()]),
                find(&mut parent, index[e.target.as_str()]),
            );
            parent[a] = b;
        }
        let mut start = 0;
        for (size, _) in blocks {
            let root = find(&mut parent, start);
            for i in 0..d {
                let same = find(&mut parent, i) == root;
                assert_eq!(same, (start..start + size).contains(&i));
            }
            start += size;
        }
    }

    #[test]
    fn graphml_and_dot_keep_isolated_nodes() {
        let mut net = build_network(&sample_matrix(), 0.3).unwrap();
        assert!(net.set_tags(&["x".into()]).is_err());
        net.set_tags(&[
            "continuous".into(),
            "discrete".into(),
            "continuous".into(),
            "discrete".into(),
        ])
        .unwrap();
        let gml = net.to_graphml();
        assert!(gml.contains("<node id=\"d\"><data key=\"t\">discrete</data></node>"));
        assert!(gml.contains("source=\"a\" target=\"b\""));
        assert_eq!(gml.matches("<edge ").count(), 3);
        let dot = net.to_dot();
        assert!(dot.contains("  \"d\";\n"));
        assert!(dot.contains("\"a\" -- \"b\" [label=\"0.72\", sign=positive]"));
        assert!(dot.contains("\"a\" -- \"c\" [label=\"-0.41\", sign=negative]"));
    }

    #[test]
    fn graphml_is_well_formed_and_structurally_valid() {
        let mut net = build_network(&sample_matrix(), 0.3).unwrap();
        net.set_tags(&["c".into(), "d&e".into(), "c".into(), "d".into()])
            .unwrap();
        let gml = net.to_graphml();
        let mut reader = quick_xml::Reader::from_str(&gml);
        let mut stack: Vec<Vec<u8>> = Vec::new();
        let mut node_ids = std::collections::HashSet::new();
        let mut edge_refs: Vec<(String, String)> = Vec::new();
        let mut keys = 0;
        let attr = |e: &quick_xml::events::BytesStart, name: &str| -> String {
            e.try_get_attribute(name)
                .unwrap()
                .unwrap_or_else(|| panic!("missing attribute {name}"))
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .unwrap()
                .into_owned()
        };
        loop {
            let (e, is_empty) = match reader.read_event().unwrap() {
                quick_xml::events::Event::Start(e) => (e, false),
                quick_xml::events::Event::Empty(e) => (e, true),
                quick_xml::events::Event::End(e) => {
                    let top = stack.pop().expect("end tag with empty stack");
                    assert_eq!(top, e.name().as_ref());
                    continue;
                }
                quick_xml::events::Event::Eof => break,
                _ => continue,
            };
            let name = e.name().as_ref().to_vec();
            match name.as_slice() {
                b"graphml" => assert!(stack.is_empty()),
                b"key" => {
                    assert_eq!(stack.last().map(Vec::as_slice), Some(&b"graphml"[..]));
                    keys += 1;
                }
                b"graph" => {
                    assert_eq!(attr(&e, "edgedefault"), "undirected");
                }
                b"node" => {
                    assert_eq!(stack.last().map(Vec::as_slice), Some(&b"graph"[..]));
                    assert!(node_ids.insert(attr(&e, "id")), "duplicate node id");
                }
                b"edge" => {
                    assert_eq!(stack.last().map(Vec::as_slice), Some(&b"graph"[..]));
                    edge_refs.push((attr(&e, "source"), attr(&e, "target")));
                }
                b"data" => {
                    attr(&e, "key");
                }
                other => panic!("unexpected element {:?}", String::from_utf8_lossy(other)),
            }
            if !is_empty {
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed elements remain");
        assert_eq!(keys, 2);
        assert_eq!(node_ids.len(), net.nodes.len());
        assert_eq!(edge_refs.len(), net.n_edges());
        for (s, t) in edge_refs {
            assert!(node_ids.contains(&s) && node_ids.contains(&t));
        }
    }

    #[test]
    fn edge_csv_round_trips_exact_weights() {
        let net = build_network(&sample_matrix(), 0.3).unwrap();
        let csv = net.edge_csv();
        let parsed = parse_edge_csv(&csv).unwrap();
        assert_eq!(parsed.len(), net.edges.len());
        for (a, b) in parsed.iter().zip(&net.edges) {
            assert_eq!(a, b);
            assert_eq!(a.weight.to_bits(), b.weight.to_bits());
        }
        assert!(parse_edge_csv("x,y\n").is_err());
        assert!(parse_edge_csv("source,target,weight\na,b,zebra\n").is_err());
    }

    #[test]
    fn json_round_trips() {
        let mut net = build_network(&sample_matrix(), 0.3).unwrap();
        net.set_tags(&["c".into(), "d".into(), "c".into(), "d".into()])
            .unwrap();
        let text = net.to_json().unwrap();
        let back = Network::from_json(&text).unwrap();
        assert_eq!(back, net);
    }
}
