// SPDX-License-Identifier: MIT OR Apache-2.0

//! Per-neuron `(W_ki, W_kj)` positions coloured by readout weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Model;
use crate::svg::{self, ScatterChart};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub neuron: usize,
    pub w_i: f64,
    pub w_j: f64,
    pub readout: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutScatter {
    pub pair: (usize, usize),
    pub points: Vec<ScatterPoint>,
}

pub fn readout_scatter(model: &Model, pair: (usize, usize)) -> Result<ReadoutScatter> {
    let m = model.inputs();
    let (i, j) = pair;
    if i >= m || j >= m || i == j {
        return Err(Error::config(format!("invalid pair ({i}, {j}) for m={m}")));
    }
    let w = &model.compute.weights;
    let r = model.readout.weights.row(i * m + j);
    let points = (0..model.neurons())
        .map(|k| ScatterPoint {
            neuron: k,
            w_i: w[[k, i]],
            w_j: w[[k, j]],
            readout: r[k],
        })
        .collect();
    Ok(ReadoutScatter { pair, points })
}

impl ReadoutScatter {
    pub fn max_abs_readout(&self) -> f64 {
        self.points.iter().map(|p| p.readout.abs()).fold(0.0, f64::max)
    }

    /// Readout weight mapped to `[-1, 1]` for the colour scale.
    pub fn normalized(&self, p: &ScatterPoint) -> f64 {
        let max = self.max_abs_readout();
        if max > 0.0 {
            p.readout / max
        } else {
            0.0
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("neuron,w_i,w_j,readout\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p.neuron, p.w_i, p.w_j, p.readout));
        }
        out
    }

    pub fn to_svg(&self, header_comment: Option<&str>) -> String {
        let (i, j) = self.pair;
        let mut chart = ScatterChart::new(format!("readout weights for z[{i},{j}]"), format!("W[k,{i}]"), format!("W[k,{j}]"));
        for p in &self.points {
            chart.point(p.w_i, p.w_j, svg::diverging(self.normalized(p)));
        }
        chart.render(header_comment)
    }

    /// Number of distinct positions after merging points closer than
    /// `radius` (single linkage).
    pub fn count_clusters(&self, radius: f64) -> usize {
        let n = self.points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in 0..n {
            for b in a + 1..n {
                let (p, q) = (&self.points[a], &self.points[b]);
                if (p.w_i - q.w_i).hypot(p.w_j - q.w_j) <= radius {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }
}
