use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DockingGraph, PharmacophoreInstance, VertexLabel};
use crate::error::{Error, Result};

/// On-disk form of a [`DockingGraph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub weights: Vec<f64>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<VertexLabel>>,
}

impl From<&DockingGraph> for GraphFile {
    fn from(g: &DockingGraph) -> Self {
        Self {
            n: g.n(),
            weights: g.weights().to_vec(),
            edges: g.edges().into_iter().map(|(i, j)| [i, j]).collect(),
            labels: g.labels().map(<[_]>::to_vec),
        }
    }
}

impl TryFrom<GraphFile> for DockingGraph {
    type Error = Error;

    fn try_from(f: GraphFile) -> Result<Self> {
        if f.weights.len() != f.n {
            return Err(Error::validation(format!(
                "n = {} but weights has {} entries",
                f.n,
                f.weights.len()
            )));
        }
        let edges: Vec<_> = f.edges.iter().map(|&[i, j]| (i, j)).collect();
        DockingGraph::new(f.weights, &edges, f.labels)
    }
}

fn parse_err(source_name: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_graph(text: &str, source_name: &str) -> Result<DockingGraph> {
    let file: GraphFile = serde_json::from_str(text).map_err(|e| parse_err(source_name, e))?;
    file.try_into()
}

pub fn parse_instance(text: &str, source_name: &str) -> Result<PharmacophoreInstance> {
    let inst: PharmacophoreInstance =
        serde_json::from_str(text).map_err(|e| parse_err(source_name, e))?;
    inst.validate()?;
    Ok(inst)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<DockingGraph> {
    let path = path.as_ref();
    parse_graph(&read(path)?, &path.display().to_string())
}

pub fn save_graph(graph: &DockingGraph, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &GraphFile::from(graph))
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<PharmacophoreInstance> {
    let path = path.as_ref();
    parse_instance(&read(path)?, &path.display().to_string())
}

pub fn save_instance(instance: &PharmacophoreInstance, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), instance)
}

/// Graphviz rendering. Vertices are labelled `index:weight`; when a solution
/// is given, its vertices and the edges among them are drawn red.
pub fn to_dot(graph: &DockingGraph, solution: Option<&[usize]>) -> String {
    let chosen = |v: usize| solution.is_some_and(|s| s.contains(&v));
    let mut out = String::from("graph docking {\n");
    for v in 0..graph.n() {
        let _ = write!(out, "  {v} [label=\"{v}:{}\"", graph.weights()[v]);
        if chosen(v) {
            out.push_str(", color=red, fontcolor=red");
        }
        out.push_str("];\n");
    }
    for (i, j) in graph.edges() {
        let _ = write!(out, "  {i} -- {j}");
        if chosen(i) && chosen(j) {
            out.push_str(" [color=red, penwidth=2]");
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_round_trip() {
        let g = DockingGraph::new(
            vec![1.0, 2.5, 0.25],
            &[(0, 1), (1, 2)],
            Some(vec![
                VertexLabel::Pair { ligand: 0, pocket: 3 },
                VertexLabel::Opaque("x".into()),
                VertexLabel::Pair { ligand: 2, pocket: 1 },
            ]),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.json");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }

    #[test]
    fn self_loop_in_file_is_a_validation_error() {
        let err = parse_graph(r#"{"n":4,"weights":[1,1,1,1],"edges":[[3,3]]}"#, "g.json")
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("self-loop"));
    }

    #[test]
    fn missing_weights_is_a_parse_error() {
        let err = parse_graph("{\n  \"n\": 2,\n  \"edges\": []\n}", "g.json").unwrap_err();
        match err {
            Error::Parse { message, .. } => {
                assert!(message.contains("weights"), "{message}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn inconsistent_n_is_a_validation_error() {
        let err = parse_graph(r#"{"n":3,"weights":[1,1],"edges":[]}"#, "g").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn instance_file_format() {
        let text = r#"{
            "pocket": [{"id": 1, "kind": "hydrophobic", "xyz": [0, 0, 0]}],
            "ligand": [{"id": 4, "kind": "hydrophobic", "xyz": [1, 0, 0]},
                       {"id": 5, "kind": "donor", "xyz": [2, 0, 0]}],
            "compat": [[true], [false]]
        }"#;
        let inst = parse_instance(text, "inst").unwrap();
        assert_eq!(inst.compatible_pairs(), 1);
        let bad = text.replace("[false]", "[true]");
        assert!(matches!(parse_instance(&bad, "inst"), Err(Error::Validation(_))));
    }

    #[test]
    fn dot_marks_solution() {
        let g = DockingGraph::new(vec![1.0, 2.0, 3.0], &[(0, 1), (1, 2)], None).unwrap();
        let dot = to_dot(&g, Some(&[1, 2]));
        assert!(dot.starts_with("graph docking {"));
        assert!(dot.contains("0 [label=\"0:1\"];"));
        assert!(dot.contains("2 [label=\"2:3\", color=red, fontcolor=red];"));
        assert!(dot.contains("1 -- 2 [color=red, penwidth=2];"));
        assert!(dot.contains("0 -- 1;"));
    }
}
