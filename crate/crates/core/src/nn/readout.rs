//! Subgraph readouts: center-node aggregation, sum pooling, and
//! SortPooling.

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::TargetSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Readout {
    /// Elementwise product of the two target rows.
    CenterHadamard,
    /// Concatenation of the two target rows.
    CenterConcat,
    /// Column sum over all rows.
    Sum,
    /// Rows sorted descending by their last channel, top k kept (zero
    /// padded), flattened. Ties break on (label, degree, local id).
    SortPool { k: usize },
}

impl Readout {
    pub fn out_dim(&self, node_dim: usize) -> usize {
        match self {
            Readout::CenterHadamard | Readout::Sum => node_dim,
            Readout::CenterConcat => 2 * node_dim,
            Readout::SortPool { k } => k * node_dim,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Readout::SortPool { k } = self
            && *k < 1
        {
            return Err(Error::InvalidArgument("sortpool k must be >= 1".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        match self {
            Readout::CenterHadamard => "center-hadamard".into(),
            Readout::CenterConcat => "center-concat".into(),
            Readout::Sum => "sum".into(),
            Readout::SortPool { k } => format!("sortpool:{k}"),
        }
    }
}

#[derive(Debug)]
pub enum ReadoutCache {
    Center { x: usize, y: usize },
    Sum,
    SortPool { order: Vec<usize> },
}

fn center_pair(targets: &TargetSet) -> Result<(usize, usize)> {
    let s = targets.as_slice();
    if s.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "center readout needs two targets, got {}",
            s.len()
        )));
    }
    Ok((s[0], s[1]))
}

impl Readout {
    /// `tie[i]` carries (label, degree) of local node i for SortPool's
    /// deterministic tie-break; other readouts ignore it.
    pub fn forward(
        &self,
        h: &DenseMatrix,
        targets: &TargetSet,
        tie: &[(u64, usize)],
    ) -> Result<(Vec<f64>, ReadoutCache)> {
        match self {
            Readout::CenterHadamard => {
                let (x, y) = center_pair(targets)?;
                let r: Vec<f64> =
                    h.row(x).iter().zip(h.row(y)).map(|(&a, &b)| a * b).collect();
                Ok((r, ReadoutCache::Center { x, y }))
            }
            Readout::CenterConcat => {
                let (x, y) = center_pair(targets)?;
                let mut r = h.row(x).to_vec();
                r.extend_from_slice(h.row(y));
                Ok((r, ReadoutCache::Center { x, y }))
            }
            Readout::Sum => Ok((h.col_sum().row(0).to_vec(), ReadoutCache::Sum)),
            Readout::SortPool { k } => {
                let n = h.rows();
                if n == 0 {
                    return Err(Error::InvalidArgument("sortpool on empty subgraph".into()));
                }
                let d = h.cols();
                let last = d - 1;
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    h.get(b, last)
                        .total_cmp(&h.get(a, last))
                        .then_with(|| tie[a].0.cmp(&tie[b].0))
                        .then_with(|| tie[a].1.cmp(&tie[b].1))
                        .then_with(|| a.cmp(&b))
                });
                order.truncate(*k);
                let mut r = vec![0.0; k * d];
                for (slot, &i) in order.iter().enumerate() {
                    r[slot * d..(slot + 1) * d].copy_from_slice(h.row(i));
                }
                Ok((r, ReadoutCache::SortPool { order }))
            }
        }
    }

    pub fn backward(&self, h: &DenseMatrix, cache: &ReadoutCache, d_r: &[f64]) -> DenseMatrix {
        let mut d_h = DenseMatrix::zeros(h.rows(), h.cols());
        match (self, cache) {
            (Readout::CenterHadamard, ReadoutCache::Center { x, y }) => {
                let hx = h.row(*x).to_vec();
                let hy = h.row(*y).to_vec();
                for (c, &g) in d_r.iter().enumerate() {
                    *d_h.row_mut(*x).get_mut(c).unwrap() += g * hy[c];
                    *d_h.row_mut(*y).get_mut(c).unwrap() += g * hx[c];
                }
            }
            (Readout::CenterConcat, ReadoutCache::Center { x, y }) => {
                let d = h.cols();
                for c in 0..d {
                    *d_h.row_mut(*x).get_mut(c).unwrap() += d_r[c];
                    *d_h.row_mut(*y).get_mut(c).unwrap() += d_r[d + c];
                }
            }
            (Readout::Sum, ReadoutCache::Sum) => {
                for i in 0..h.rows() {
                    for (c, &g) in d_r.iter().enumerate() {
                        *d_h.row_mut(i).get_mut(c).unwrap() += g;
                    }
                }
            }
            (Readout::SortPool { .. }, ReadoutCache::SortPool { order }) => {
                let d = h.cols();
                for (slot, &i) in order.iter().enumerate() {
                    let seg = &d_r[slot * d..(slot + 1) * d];
                    let row = d_h.row_mut(i);
                    for (c, &g) in seg.iter().enumerate() {
                        row[c] += g;
                    }
                }
            }
            _ => unreachable!("cache shaped by this readout"),
        }
        d_h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_of_zero_rows_is_zero() {
        let h = DenseMatrix::zeros(2, 3);
        let t = TargetSet::pair(0, 1).unwrap();
        let (r, _) = Readout::CenterHadamard.forward(&h, &t, &[(0, 0), (0, 0)]).unwrap();
        assert_eq!(r, vec![0.0; 3]);
    }

    #[test]
    fn sum_ignores_row_order() {
        let h = DenseMatrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap();
        let h_rev = DenseMatrix::from_rows(vec![vec![5.0, 6.0], vec![3.0, 4.0], vec![1.0, 2.0]])
            .unwrap();
        let t = TargetSet::pair(0, 1).unwrap();
        let tie = vec![(0, 0); 3];
        let (a, _) = Readout::Sum.forward(&h, &t, &tie).unwrap();
        let (b, _) = Readout::Sum.forward(&h_rev, &t, &tie).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn sortpool_orders_by_last_channel() {
        let h = DenseMatrix::from_rows(vec![
            vec![1.0, 0.5],
            vec![2.0, 0.9],
            vec![3.0, 0.1],
        ])
        .unwrap();
        let t = TargetSet::pair(0, 1).unwrap();
        let (r, cache) = Readout::SortPool { k: 2 }
            .forward(&h, &t, &[(0, 0), (0, 0), (0, 0)])
            .unwrap();
        assert_eq!(r, vec![2.0, 0.9, 1.0, 0.5]);
        match cache {
            ReadoutCache::SortPool { order } => assert_eq!(order, vec![1, 0]),
            _ => panic!(),
        }
    }

    #[test]
    fn sortpool_pads_short_input() {
        let h = DenseMatrix::from_rows(vec![vec![1.0, 7.0]]).unwrap();
        let t = TargetSet::single(0);
        let (r, _) = Readout::SortPool { k: 3 }.forward(&h, &t, &[(0, 0)]).unwrap();
        assert_eq!(r, vec![1.0, 7.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
