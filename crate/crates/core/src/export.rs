//! Rendering of complexes and partitions: plain text, JSON (round-trip
//! safe), and a Macaulay2 session for independent cross-checking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::partition::AcyclicPartition;
use crate::poly::Polynomial;
use crate::resolution::{minimal_generators, FreeComplex, IdealKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: String,
    pub exps: Vec<u32>,
    pub t: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<EntryJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisJson {
    /// Blocks with 1-indexed vertices, sorted.
    pub blocks: Vec<Vec<usize>>,
    /// Orientation as (tail block index, head block index) pairs.
    pub orientation: Vec<[usize; 2]>,
    pub divisor: Vec<i64>,
    pub multidegree: Vec<i64>,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub rank: usize,
    pub basis: Vec<BasisJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub ideal: String,
    pub n: usize,
    pub t_weight: u32,
    pub lambda: Option<Vec<i64>>,
    pub modules: Vec<ModuleJson>,
    pub differentials: Vec<MatrixJson>,
}

pub fn complex_to_json(c: &FreeComplex) -> ComplexJson {
    let modules = c
        .bases()
        .iter()
        .map(|level| ModuleJson {
            rank: level.len(),
            basis: level
                .iter()
                .map(|b| BasisJson {
                    blocks: b
                        .rep
                        .blocks()
                        .iter()
                        .map(|blk| blk.iter().map(|v| v + 1).collect())
                        .collect(),
                    orientation: b.rep.edges().iter().map(|e| [e.tail, e.head]).collect(),
                    divisor: b.divisor.values.clone(),
                    multidegree: b.multidegree.values.clone(),
                    weight: b.weight,
                })
                .collect(),
        })
        .collect();
    let differentials = c
        .differentials()
        .iter()
        .map(|m| MatrixJson {
            rows: m.rows,
            cols: m.cols,
            entries: m
                .entries()
                .map(|(&(row, col), p)| EntryJson {
                    row,
                    col,
                    terms: p
                        .terms()
                        .map(|(mono, coeff)| TermJson {
                            coeff: coeff.to_string(),
                            exps: mono.exps.clone(),
                            t: mono.t_exp,
                        })
                        .collect(),
                })
                .collect(),
        })
        .collect();
    ComplexJson {
        ideal: c.kind().short_name().to_string(),
        n: c.n(),
        t_weight: c.t_weight(),
        lambda: c.lambda().map(|l| l.to_vec()),
        modules,
        differentials,
    }
}

pub fn complex_json_string(c: &FreeComplex) -> String {
    serde_json::to_string_pretty(&complex_to_json(c)).expect("complex serialization")
}

pub fn complex_json_parse(s: &str) -> Result<ComplexJson> {
    serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))
}

/// Plain-text rendering: ranks, multidegrees, and the differential
/// matrices with graded-lex term order.
pub fn complex_text(c: &FreeComplex) -> String {
    let mut out = String::new();
    let name = match c.kind() {
        IdealKind::Parking => "parking-function ideal",
        IdealKind::Toppling => "toppling ideal",
        IdealKind::Homogenized => "homogenized toppling ideal",
    };
    out.push_str(&format!("minimal free resolution of the {name}\n"));
    let ranks: Vec<String> = c.ranks().iter().map(|r| r.to_string()).collect();
    out.push_str(&format!("ranks: {}\n", ranks.join(" ")));
    if let Some(lambda) = c.lambda() {
        let l: Vec<String> = lambda.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!(
            "lambda: ({}), t-weight {}\n",
            l.join(","),
            c.t_weight()
        ));
    }
    for k in 1..c.length() {
        let d = c.differential(k);
        out.push_str(&format!("d_{k} ({} x {}):\n", d.rows, d.cols));
        for r in 0..d.rows {
            let row: Vec<String> = (0..d.cols)
                .map(|cc| match d.get(r, cc) {
                    Some(p) => p.to_string(),
                    None => "0".to_string(),
                })
                .collect();
            out.push_str(&format!("[{}]\n", row.join(", ")));
        }
    }
    out
}

/// Emits a Macaulay2 session that independently resolves the ideal and
/// prints its Betti table, for external cross-validation.
pub fn cas_script(g: &Multigraph, c: &FreeComplex) -> String {
    let n = c.n();
    let mut out = String::new();
    out.push_str("-- Macaulay2 session: resolve the ideal independently and\n");
    out.push_str("-- print its Betti table for comparison with `betti`.\n");
    let ring_vars = if c.kind() == IdealKind::Homogenized {
        format!("x_1..x_{n}, t")
    } else {
        format!("x_1..x_{n}")
    };
    out.push_str(&format!("R = QQ[{ring_vars}];\n"));
    let gens: Vec<String> = match c.kind() {
        IdealKind::Parking => minimal_generators(g)
            .iter()
            .map(|m| m.to_string())
            .collect(),
        IdealKind::Toppling | IdealKind::Homogenized => {
            let d1 = c.differential(1);
            (0..d1.cols)
                .map(|col| {
                    d1.get(0, col)
                        .cloned()
                        .unwrap_or_else(|| Polynomial::zero(n))
                        .to_string()
                })
                .collect()
        }
    };
    out.push_str(&format!("I = ideal({});\n", gens.join(", ")));
    out.push_str("C = res(R^1/I);\n");
    out.push_str("print betti C;\n");
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionJson {
    pub blocks: Vec<Vec<usize>>,
    pub orientation: Vec<[usize; 2]>,
}

pub fn partition_to_json(p: &AcyclicPartition) -> PartitionJson {
    PartitionJson {
        blocks: p
            .blocks()
            .iter()
            .map(|blk| blk.iter().map(|v| v + 1).collect())
            .collect(),
        orientation: p.edges().iter().map(|e| [e.tail, e.head]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resolution::{build_parking, build_toppling};

    fn kite() -> Multigraph {
        Multigraph::parse("1 2 1\n1 3 1\n1 4 1\n2 4 1\n3 4 1\n", None).unwrap()
    }

    #[test]
    fn json_round_trip_is_identity() {
        let g = kite();
        for c in [build_parking(&g).unwrap(), build_toppling(&g).unwrap()] {
            let s1 = complex_json_string(&c);
            let parsed = complex_json_parse(&s1).unwrap();
            let s2 = serde_json::to_string_pretty(&parsed).unwrap();
            assert_eq!(s1, s2);
        }
    }

    #[test]
    fn text_rendering_mentions_ranks() {
        let g = kite();
        let c = build_parking(&g).unwrap();
        let text = complex_text(&c);
        assert!(text.contains("ranks: 1 6 9 4"));
        assert!(text.contains("d_1 (1 x 6):"));
    }

    #[test]
    fn cas_script_contains_generators() {
        let g = kite();
        let c = build_parking(&g).unwrap();
        let script = cas_script(&g, &c);
        assert!(script.contains("R = QQ[x_1..x_4];"));
        assert!(script.contains("x_1^3"));
        assert!(script.contains("res"));
        let ct = build_toppling(&g).unwrap();
        let script = cas_script(&g, &ct);
        assert!(script.contains("x_1^3 - x_2*x_3*x_4"));
    }
}
