//! JSON and DOT serialisation of parity formulas.
//!
//! Schema:
//! ```json
//! {
//!   "vertices": [{"id": "a", "label": "and", "priority": 2}, ...],
//!   "edges": [["a", "b", "D"], ["b", "a", "B"], ["a", "c"]],
//!   "initial": "a"
//! }
//! ```
//! Labels: `"true" | "false" | "and" | "or" | "dia" | "box" | "eps"` or a
//! literal written as `"p"` / `"~p"`. Edge tags are optional.

use super::{EdgeTagging, Label, ParityFormula, Vertex};
use crate::error::{Error, Result};
use crate::formula::Var;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
struct VertexDto {
    id: String,
    label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    priority: Option<u32>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParityDto {
    vertices: Vec<VertexDto>,
    edges: Vec<serde_json::Value>,
    initial: String,
}

fn label_to_string(l: &Label) -> String {
    match l {
        Label::Top => "true".into(),
        Label::Bot => "false".into(),
        Label::And => "and".into(),
        Label::Or => "or".into(),
        Label::Dia => "dia".into(),
        Label::Box => "box".into(),
        Label::Eps => "eps".into(),
        Label::Lit(v, true) => v.name().to_string(),
        Label::Lit(v, false) => format!("~{}", v.name()),
    }
}

fn label_from_string(s: &str) -> Label {
    match s {
        "true" => Label::Top,
        "false" => Label::Bot,
        "and" => Label::And,
        "or" => Label::Or,
        "dia" => Label::Dia,
        "box" => Label::Box,
        "eps" => Label::Eps,
        _ => {
            if let Some(rest) = s.strip_prefix('~') {
                Label::Lit(Var::new(rest), false)
            } else {
                Label::Lit(Var::new(s), true)
            }
        }
    }
}

pub fn to_json(g: &ParityFormula) -> serde_json::Value {
    let vertices: Vec<VertexDto> = g
        .verts
        .iter()
        .map(|v| VertexDto {
            id: v.id.clone(),
            label: label_to_string(&v.label),
            priority: v.priority,
        })
        .collect();
    let mut edges = Vec::new();
    for v in 0..g.size() {
        for &w in &g.succ[v] {
            let mut e = vec![
                serde_json::Value::String(g.verts[v].id.clone()),
                serde_json::Value::String(g.verts[w].id.clone()),
            ];
            if let Some(t) = &g.tagging {
                e.push(serde_json::Value::String(
                    if t.is_back(v, w) { "B" } else { "D" }.to_string(),
                ));
            }
            edges.push(serde_json::Value::Array(e));
        }
    }
    serde_json::json!({
        "vertices": vertices,
        "edges": edges,
        "initial": g.verts[g.initial].id,
    })
}

pub fn from_json(value: &serde_json::Value) -> Result<ParityFormula> {
    let dto: ParityDto = serde_json::from_value(value.clone())
        .map_err(|e| Error::BadInput(format!("parity formula json: {}", e)))?;
    let verts: Vec<Vertex> = dto
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id.clone(),
            label: label_from_string(&v.label),
            priority: v.priority,
        })
        .collect();
    let idx = |id: &str| -> Result<usize> {
        verts
            .iter()
            .position(|v| v.id == id)
            .ok_or_else(|| Error::BadInput(format!("unknown vertex id {}", id)))
    };
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    let mut back: Vec<Option<usize>> = vec![None; verts.len()];
    let mut any_tag = false;
    for e in &dto.edges {
        let arr = e
            .as_array()
            .ok_or_else(|| Error::BadInput("edge must be an array".into()))?;
        if arr.len() < 2 {
            return Err(Error::BadInput("edge needs [from, to]".into()));
        }
        let from = idx(arr[0].as_str().ok_or_else(|| Error::BadInput("edge endpoint".into()))?)?;
        let to = idx(arr[1].as_str().ok_or_else(|| Error::BadInput("edge endpoint".into()))?)?;
        succ[from].push(to);
        if let Some(tag) = arr.get(2).and_then(|t| t.as_str()) {
            any_tag = true;
            if tag == "B" {
                back[from] = Some(to);
            }
        }
    }
    let initial = idx(&dto.initial)?;
    let tagging = if any_tag {
        Some(EdgeTagging { back_of: back, companions_exact: false })
    } else {
        None
    };
    let mut g = ParityFormula { verts, succ, initial, tagging };
    if let Some(t) = &mut g.tagging {
        let companions: std::collections::BTreeSet<usize> =
            t.back_of.iter().flatten().copied().collect();
        let states: std::collections::BTreeSet<usize> = g
            .verts
            .iter()
            .enumerate()
            .filter(|(_, v)| v.priority.is_some())
            .map(|(i, _)| i)
            .collect();
        t.companions_exact = companions == states;
    }
    Ok(g)
}

/// GraphViz export; priorities are shown as vertex annotations, back
/// edges are dashed when a tagging is present.
pub fn to_dot(g: &ParityFormula) -> String {
    let mut out = String::from("digraph parity {\n");
    for (i, v) in g.verts.iter().enumerate() {
        let pr = v
            .priority
            .map(|p| format!("\\nprio {}", p))
            .unwrap_or_default();
        let shape = if i == g.initial { "doublecircle" } else { "circle" };
        out.push_str(&format!(
            "  \"{}\" [label=\"{}: {}{}\", shape={}];\n",
            v.id, v.id, v.label, pr, shape
        ));
    }
    for v in 0..g.size() {
        for &w in &g.succ[v] {
            let style = match &g.tagging {
                Some(t) if t.is_back(v, w) => " [style=dashed]",
                _ => "",
            };
            out.push_str(&format!(
                "  \"{}\" -> \"{}\"{};\n",
                g.verts[v].id, g.verts[w].id, style
            ));
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let g = ParityFormula {
            verts: vec![
                Vertex { id: "a".into(), label: Label::Or, priority: None },
                Vertex { id: "b".into(), label: Label::Eps, priority: Some(1) },
                Vertex {
                    id: "p".into(),
                    label: Label::Lit(Var::new("p"), false),
                    priority: None,
                },
            ],
            succ: vec![vec![1, 2], vec![0], vec![]],
            initial: 0,
            tagging: None,
        };
        let j = to_json(&g);
        let h = from_json(&j).unwrap();
        assert_eq!(h.size(), g.size());
        assert_eq!(h.initial, g.initial);
        assert_eq!(h.succ, g.succ);
        for v in 0..g.size() {
            assert_eq!(h.verts[v].label, g.verts[v].label);
            assert_eq!(h.verts[v].priority, g.verts[v].priority);
        }
        assert_eq!(to_json(&h), j);
    }
}
