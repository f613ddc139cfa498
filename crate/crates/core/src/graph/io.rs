use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{Dag, MixedGraph};
use crate::error::{Error, Result};

/// JSON shape shared by [`MixedGraph`] and [`Dag`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub p: usize,
    pub names: Option<Vec<String>>,
    pub directed: Vec<[usize; 2]>,
    pub undirected: Vec<[usize; 2]>,
}

fn dot_id(name: &str) -> String {
    let plain = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

impl MixedGraph {
    /// Graphviz rendering; undirected edges carry `dir=none`.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for i in 0..self.p() {
            let _ = writeln!(s, "  {};", dot_id(&self.name(i)));
        }
        for (i, j) in self.directed_edges() {
            let _ = writeln!(s, "  {} -> {};", dot_id(&self.name(i)), dot_id(&self.name(j)));
        }
        for (i, j) in self.undirected_edges() {
            let _ = writeln!(
                s,
                "  {} -> {} [dir=none];",
                dot_id(&self.name(i)),
                dot_id(&self.name(j))
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson {
            p: self.p(),
            names: self.names().map(|n| n.to_vec()),
            directed: self.directed_edges().into_iter().map(|(i, j)| [i, j]).collect(),
            undirected: self.undirected_edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("plain data serializes")
    }

    pub fn from_json_value(v: &GraphJson) -> Result<Self> {
        if v.names.as_ref().is_some_and(|n| n.len() != v.p) {
            return Err(Error::InvalidRequest("names length differs from p".into()));
        }
        let d: Vec<(usize, usize)> = v.directed.iter().map(|e| (e[0], e[1])).collect();
        let u: Vec<(usize, usize)> = v.undirected.iter().map(|e| (e[0], e[1])).collect();
        Ok(MixedGraph::from_edges(v.p, &d, &u)?.with_names(v.names.clone()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        MixedGraph::from_json_value(&serde_json::from_str(s)?)
    }
}

impl Dag {
    pub fn to_dot(&self) -> String {
        self.as_mixed().to_dot()
    }

    pub fn to_json(&self) -> String {
        self.as_mixed().to_json()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Dag::try_from_mixed(MixedGraph::from_json(s)?)
    }
}
