//! JSON spaces, CSV fields and JSON vertex sets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Edge, GraphParts, GraphSpace, Layout, RadialCross, RadialSpace, Space};
use crate::error::{Error, Result};
use crate::field::Field;

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pos: Vec<f64>,
    measure: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    boundary: bool,
}

#[derive(Serialize, Deserialize)]
struct SpaceRecord {
    backend: String,
    #[serde(rename = "N")]
    dim: f64,
    #[serde(default)]
    label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    vertices: Vec<VertexRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    edges: Vec<Edge>,
    #[serde(rename = "crossSectionMass", default)]
    cross_section_mass: Option<f64>,
    #[serde(rename = "rMin", default, skip_serializing_if = "Option::is_none")]
    r_min: Option<f64>,
    #[serde(rename = "rMax", default, skip_serializing_if = "Option::is_none")]
    r_max: Option<f64>,
    #[serde(rename = "crossSection", default, skip_serializing_if = "Option::is_none")]
    cross: Option<RadialCross>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layout: Option<Layout>,
}

pub fn space_to_json(space: &Space) -> Result<String> {
    let rec = match space {
        Space::Graph(g) => {
            let parts = g.parts();
            SpaceRecord {
                backend: "graph".into(),
                dim: parts.dim,
                label: parts.label,
                vertices: (0..g.len())
                    .map(|x| VertexRecord {
                        id: x,
                        pos: g.position(x).map(<[f64]>::to_vec).unwrap_or_default(),
                        measure: g.measure(x),
                        boundary: g.is_boundary(x),
                    })
                    .collect(),
                edges: parts.edges,
                cross_section_mass: None,
                r_min: None,
                r_max: None,
                cross: None,
                layout: parts.layout,
            }
        }
        Space::Radial(r) => SpaceRecord {
            backend: "radial".into(),
            dim: r.dim,
            label: r.label.clone(),
            vertices: Vec::new(),
            edges: Vec::new(),
            cross_section_mass: Some(r.cross_section_mass),
            r_min: Some(r.r_min),
            r_max: r.r_max.is_finite().then_some(r.r_max),
            cross: Some(r.cross.clone()),
            layout: None,
        },
    };
    Ok(serde_json::to_string(&rec)?)
}

pub fn space_from_json(text: &str) -> Result<Space> {
    let rec: SpaceRecord = serde_json::from_str(text)?;
    match rec.backend.as_str() {
        "graph" => {
            let n = rec.vertices.len();
            let mut order: Vec<Option<VertexRecord>> = (0..n).map(|_| None).collect();
            for v in rec.vertices {
                if v.id >= n || order[v.id].is_some() {
                    return Err(Error::Malformed(format!(
                        "vertex ids must be 0..{n} without repeats (got {})",
                        v.id
                    )));
                }
                let id = v.id;
                order[id] = Some(v);
            }
            let verts: Vec<VertexRecord> = order.into_iter().map(Option::unwrap).collect();
            let has_pos = verts.iter().all(|v| !v.pos.is_empty());
            let parts = GraphParts {
                dim: rec.dim,
                label: rec.label,
                positions: if has_pos {
                    verts.iter().map(|v| v.pos.clone()).collect()
                } else {
                    Vec::new()
                },
                measures: verts.iter().map(|v| v.measure).collect(),
                boundary: verts.iter().map(|v| v.boundary).collect(),
                edges: rec.edges,
                layout: rec.layout,
            };
            Ok(Space::Graph(GraphSpace::new(parts)?))
        }
        "radial" => {
            let mass = rec
                .cross_section_mass
                .ok_or_else(|| Error::Malformed("radial space needs crossSectionMass".into()))?;
            let mut s = RadialSpace::new(rec.dim, mass, rec.cross.unwrap_or(RadialCross::Abstract))?;
            if !rec.label.is_empty() {
                s.label = rec.label;
            }
            let (lo, hi) = (rec.r_min.unwrap_or(0.0), rec.r_max.unwrap_or(f64::INFINITY));
            if lo > 0.0 || hi.is_finite() {
                s = s.with_range(lo, hi)?;
            }
            Ok(Space::Radial(s))
        }
        other => Err(Error::Malformed(format!("unknown backend {other:?}"))),
    }
}

/// Fixed 17-significant-digit rendering used by every numeric writer.
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// `id,value` rows for the defined vertices.
pub fn field_to_csv(field: &Field) -> String {
    let mut out = String::from("id,value\n");
    for (x, v) in field.iter() {
        let _ = writeln!(out, "{x},{}", fmt_num(v));
    }
    out
}

/// Parse `id,value` rows; vertices without a row are outside the mask.
pub fn field_from_csv(text: &str, n: usize) -> Result<Field> {
    let mut values = vec![f64::NAN; n];
    let mut mask = vec![false; n];
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (line_no == 0 && line.starts_with("id")) {
            continue;
        }
        let (id, value) = line
            .split_once(',')
            .ok_or_else(|| Error::Malformed(format!("line {}: expected id,value", line_no + 1)))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("line {}: bad id", line_no + 1)))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("line {}: bad value", line_no + 1)))?;
        if id >= n {
            return Err(Error::Malformed(format!("vertex {id} out of range")));
        }
        values[id] = v;
        mask[id] = true;
    }
    Field::new(values, mask)
}

/// Vertex set stored as a JSON array of ids.
pub fn set_from_json(text: &str, n: usize) -> Result<Vec<usize>> {
    let ids: Vec<usize> = serde_json::from_str(text)?;
    if let Some(&bad) = ids.iter().find(|&&x| x >= n) {
        return Err(Error::Malformed(format!("vertex {bad} out of range")));
    }
    Ok(ids)
}

pub fn set_to_json(set: &[usize]) -> String {
    serde_json::to_string(set).expect("ids serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_cone, build_path, CrossSection};

    #[test]
    fn graph_json_round_trip_keeps_structure() {
        let g = build_cone(3.0, &CrossSection::circle(2.0), 0.5, 2.0, 4).unwrap();
        let text = space_to_json(&Space::Graph(g.clone())).unwrap();
        let back = space_from_json(&text).unwrap();
        let b = back.as_graph().unwrap();
        assert_eq!(b.len(), g.len());
        for (e, f) in b.edges().iter().zip(g.edges()) {
            assert_eq!((e.a, e.b), (f.a, f.b));
            assert!((e.weight - f.weight).abs() <= 1e-15 * f.weight);
            assert!((e.length - f.length).abs() <= 1e-15 * f.length);
        }
        for (m, n) in b.measures().iter().zip(g.measures()) {
            assert!((m - n).abs() <= 1e-15 * n);
        }
        assert!(b.cone().is_some());
    }

    #[test]
    fn radial_json_and_unknown_backend() {
        let text = space_to_json(&Space::Radial(RadialSpace::euclidean(3))).unwrap();
        let back = space_from_json(&text).unwrap();
        assert_eq!(back.dim(), 3.0);
        assert!(space_from_json(r#"{"backend":"mesh","N":2}"#).is_err());
        assert!(space_from_json("not json").is_err());
    }

    #[test]
    fn csv_fields_and_sets() {
        let p = build_path(4).unwrap();
        let f = Field::from_fn(&p, |x| x as f64 * 0.1).restrict(|x| x != 2);
        let back = field_from_csv(&field_to_csv(&f), 4).unwrap();
        assert_eq!(back.mask(), f.mask());
        assert!(back.value(2).is_nan());
        assert!((back.value(3) - 0.3).abs() < 1e-15);
        assert!(field_from_csv("id,value\n7,1.0\n", 4).is_err());
        assert!(field_from_csv("id,value\n1;2\n", 4).is_err());
        assert_eq!(set_from_json("[0, 3]", 4).unwrap(), vec![0, 3]);
        assert!(set_from_json("[4]", 4).is_err());
        assert_eq!(set_to_json(&[1, 2]), "[1,2]");
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
    }
}
