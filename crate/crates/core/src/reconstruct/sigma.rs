//! σ-sets `σ(z_j, v)`, the values `T_{z_j, v}` and the boundary test.

use rayon::prelude::*;

use super::gradient::GradientTable;
use crate::data::TravelTimeDataset;

/// `k` nearest rows of every complete row in the sup-norm embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct SupNeighbors {
    pub k: usize,
    pub idx: Vec<Vec<usize>>,
    pub dist: Vec<Vec<f64>>,
}

impl SupNeighbors {
    pub fn build(ds: &TravelTimeDataset, k: usize) -> Self {
        let complete: Vec<usize> = (0..ds.n).filter(|&i| ds.row_is_complete(i)).collect();
        let per: Vec<(Vec<usize>, Vec<f64>)> = (0..ds.n)
            .into_par_iter()
            .map(|i| {
                if !ds.row_is_complete(i) {
                    return (Vec::new(), Vec::new());
                }
                let mut d: Vec<(f64, usize)> =
                    complete.iter().filter(|&&q| q != i).map(|&q| (ds.sup_gap(i, q), q)).collect();
                let kk = k.min(d.len());
                if kk > 0 && kk < d.len() {
                    d.select_nth_unstable_by(kk - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                }
                d.truncate(kk);
                d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                (d.iter().map(|x| x.1).collect(), d.iter().map(|x| x.0).collect())
            })
            .collect();
        let (idx, dist) = per.into_iter().unzip();
        Self { k, idx, dist }
    }
}

/// Discrete continuity of `q ↦ grad r_q(z_j)` at every (source, sensor):
/// the `k` sup-norm nearest rows are smooth at `j` with gradients within `kappa`.
pub fn continuity_table(grads: &GradientTable, nbrs: &SupNeighbors, k: usize, kappa: f64) -> Vec<bool> {
    let mut out = vec![false; grads.n * grads.m];
    for i in 0..grads.n {
        if nbrs.idx[i].is_empty() {
            continue;
        }
        for j in grads.interior_sensors() {
            let gi = grads.get(i, j);
            if !grads.is_smooth(i, j) {
                continue;
            }
            out[i * grads.m + j] = nbrs.idx[i]
                .iter()
                .take(k)
                .all(|&q| grads.is_smooth(q, j) && (grads.get(q, j) - gi).abs() <= kappa);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSet {
    pub sensor: usize,
    pub v: f64,
    pub members: Vec<usize>,
    pub t_value: f64,
    /// Member attaining `T`.
    pub argmax: Option<usize>,
    /// Only the source at the sensor itself qualified.
    pub thin: bool,
}

pub struct SigmaContext<'a> {
    pub ds: &'a TravelTimeDataset,
    pub grads: &'a GradientTable,
    pub continuity: &'a [bool],
    pub gamma_rows: &'a [Option<usize>],
    pub tol_grad: f64,
}

impl SigmaContext<'_> {
    pub fn qualifies(&self, i: usize, j: usize, v: f64) -> bool {
        let m = self.grads.m;
        self.continuity[i * m + j] && (self.grads.get(i, j) + v).abs() <= self.tol_grad
    }

    pub fn build(&self, j: usize, v: f64) -> SigmaSet {
        let mut members: Vec<usize> = (0..self.ds.n).filter(|&i| self.qualifies(i, j, v)).collect();
        let thin = members.is_empty();
        if let Some(g) = self.gamma_rows[j] {
            if !members.contains(&g) {
                members.push(g);
            }
        }
        let (argmax, t_value) = members
            .iter()
            .map(|&i| (i, self.ds.get(i, j)))
            .fold((None, 0.0), |acc, (i, r)| if r > acc.1 { (Some(i), r) } else { acc });
        SigmaSet { sensor: j, v, members, t_value, argmax, thin }
    }
}

/// Uniform direction grid on `[-v_max, v_max]`.
pub fn direction_grid(count: usize, v_max: f64) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|k| -v_max + 2.0 * v_max * k as f64 / (count - 1) as f64).collect()
}

/// Sets whose `T` lies more than `2·tol_t` below both direction neighbors at
/// the same sensor. The cut time is continuous in `v`, so such a dip means no
/// source near the far end of the geodesic made it into the set.
pub fn undersampled_sets(sets: &[SigmaSet], tol_t: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by(|&a, &b| sets[a].sensor.cmp(&sets[b].sensor).then(sets[a].v.total_cmp(&sets[b].v)));
    let mut out = vec![false; sets.len()];
    for w in order.windows(3) {
        let (l, c, r) = (&sets[w[0]], &sets[w[1]], &sets[w[2]]);
        if l.sensor != c.sensor || r.sensor != c.sensor || l.thin || r.thin {
            continue;
        }
        out[w[1]] = c.t_value < l.t_value.min(r.t_value) - 2.0 * tol_t;
    }
    out
}

/// Boundary test: `p_i ∈ ∂M` iff `i ∈ σ(z_j, v)` with `r_i(z_j) = T_{z_j, v}` within `tol_t`.
/// Returns the flags and, per source, the witnessing (sensor, direction) if any.
/// Thin and undersampled sets are skipped.
pub fn classify_boundary(sets: &[SigmaSet], ds: &TravelTimeDataset, tol_t: f64) -> (Vec<bool>, Vec<Option<(usize, f64)>>) {
    let mut flags = vec![false; ds.n];
    let mut witness = vec![None; ds.n];
    let skip = undersampled_sets(sets, tol_t);
    for (s, skip) in sets.iter().zip(skip) {
        if s.thin || skip {
            continue;
        }
        for &i in &s.members {
            if !flags[i] && (ds.get(i, s.sensor) - s.t_value).abs() <= tol_t {
                flags[i] = true;
                witness[i] = Some((s.sensor, s.v));
            }
        }
    }
    (flags, witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(sensor: usize, v: f64, t_value: f64) -> SigmaSet {
        SigmaSet { sensor, v, members: vec![0], t_value, argmax: Some(0), thin: false }
    }

    #[test]
    fn isolated_dip_is_undersampled() {
        let sets = vec![set(0, -0.1, 2.0), set(0, 0.0, 1.3), set(0, 0.1, 2.1), set(1, -0.1, 1.0), set(1, 0.0, 1.2)];
        assert_eq!(undersampled_sets(&sets, 0.08), vec![false, true, false, false, false]);
        // a smooth slope is left alone, and neighbors never cross sensors
        let sets = vec![set(0, -0.1, 2.0), set(0, 0.0, 1.9), set(0, 0.1, 1.7), set(1, -0.1, 3.0)];
        assert!(undersampled_sets(&sets, 0.08).iter().all(|u| !u));
    }
}
