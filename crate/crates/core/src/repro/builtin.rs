//! The five four-agent scenarios, generated in code.
//!
//! Every scenario is written as a directed hypergraph holding one edge per
//! nonzero adjacency entry, so the tensors can be audited entry by entry.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::balance::FactionVector;
use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, Hypergraph, LaplacianSpec};

pub const BUILTIN_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builtin {
    /// Signless all-ones 4-uniform hypergraph.
    #[serde(rename = "fig-a")]
    FigA,
    /// Signless 3-uniform layer with two heavier rows, plus an all-ones graph layer.
    #[serde(rename = "fig-b")]
    FigB,
    /// Signed 4-uniform hypergraph balanced by `(1, 1, -1, -1)`.
    #[serde(rename = "fig-c")]
    FigC,
    /// `fig-c` plus a signed graph layer with the same faction vector.
    #[serde(rename = "fig-d")]
    FigD,
    /// Signed 4-uniform and graph layers balanced by `(1, 1, -1, 1)`, arctan interaction.
    #[serde(rename = "fig-np")]
    FigNp,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [Builtin::FigA, Builtin::FigB, Builtin::FigC, Builtin::FigD, Builtin::FigNp];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::FigA => "fig-a",
            Builtin::FigB => "fig-b",
            Builtin::FigC => "fig-c",
            Builtin::FigD => "fig-d",
            Builtin::FigNp => "fig-np",
        }
    }

    /// Faction vector the scenario is built around, `None` for signless ones.
    pub fn faction(self) -> Option<FactionVector> {
        let s = match self {
            Builtin::FigA | Builtin::FigB => return None,
            Builtin::FigC | Builtin::FigD => vec![1, 1, -1, -1],
            Builtin::FigNp => vec![1, 1, -1, 1],
        };
        Some(FactionVector::new(s).expect("literal is +-1"))
    }

    pub fn spec(self) -> LaplacianSpec {
        match self {
            Builtin::FigA | Builtin::FigB => LaplacianSpec::DirectedWeighted,
            _ => LaplacianSpec::SignedDirected,
        }
    }

    pub fn is_non_polynomial(self) -> bool {
        self == Builtin::FigNp
    }

    pub fn graph(self) -> Hypergraph {
        let sigma = self.faction().unwrap_or_else(|| FactionVector::ones(BUILTIN_NODES));
        let mut edges = Vec::new();
        match self {
            Builtin::FigA => edges.extend(signed_layer(&sigma, 4)),
            Builtin::FigB => {
                // 1-based A_{23j} = 2 and A_{24j} = 3 for every j
                for t in all_tuples(3) {
                    let w = match (t[0], t[1]) {
                        (1, 2) => 2.0,
                        (1, 3) => 3.0,
                        _ => 1.0,
                    };
                    edges.push(Hyperedge::directed(t[0], t[1..].to_vec(), w));
                }
                edges.extend(signed_layer(&sigma, 2));
            }
            Builtin::FigC => edges.extend(signed_layer(&sigma, 4)),
            Builtin::FigD | Builtin::FigNp => {
                edges.extend(signed_layer(&sigma, 4));
                edges.extend(signed_layer(&sigma, 2));
            }
        }
        Hypergraph::new(BUILTIN_NODES, true, edges).expect("builtin graphs are valid")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown builtin {s:?} (expected fig-a..fig-d or fig-np)")))
    }
}

fn all_tuples(order: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = BUILTIN_NODES.pow(order as u32);
    (0..total).map(move |mut code| {
        let mut t = vec![0; order];
        for slot in t.iter_mut().rev() {
            *slot = code % BUILTIN_NODES;
            code /= BUILTIN_NODES;
        }
        t
    })
}

/// Every tuple of the given order with unit magnitude and sign `sigma_{i1}..sigma_{ik}`.
fn signed_layer(sigma: &FactionVector, order: usize) -> Vec<Hyperedge> {
    all_tuples(order)
        .map(|t| {
            let w = f64::from(sigma.tuple_sign(&t));
            Hyperedge::directed(t[0], t[1..].to_vec(), w)
        })
        .collect()
}
