//! Vine structure selection from data.
//!
//! Edge weights are absolute Kendall taus. The C-vine root (and the full
//! order) ranks variables by total |tau| against all others; the D-vine
//! path grows greedily from the strongest pair; R-vine trees are maximum
//! spanning trees, with conditional taus for trees >= 2 computed on
//! h-transformed pseudo-observations (tau-inverted Gaussian transforms,
//! so selection needs no inner MLE).

use super::structure::{VineKind, VineStructure};
use crate::bicop::{hfunc1, hfunc2, BicopSpec, FamilyId, Rotation};
use crate::error::{Error, Result};
use crate::util::stats::kendall_tau;
use nalgebra::DMatrix;
use std::collections::BTreeSet;

fn tau_matrix(u: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let d = u.ncols();
    let cols: Vec<Vec<f64>> = (0..d).map(|j| u.column(j).iter().copied().collect()).collect();
    let mut tau = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let t = kendall_tau(&cols[i], &cols[j])?;
            tau[i][j] = t;
            tau[j][i] = t;
        }
    }
    Ok(tau)
}

fn cvine_order(tau: &[Vec<f64>]) -> Vec<usize> {
    let d = tau.len();
    let mut scored: Vec<(usize, f64)> = (0..d)
        .map(|i| (i, (0..d).filter(|&j| j != i).map(|j| tau[i][j].abs()).sum()))
        .collect();
    // descending score, index ascending for ties
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.into_iter().map(|(i, _)| i).collect()
}

fn dvine_order(tau: &[Vec<f64>]) -> Vec<usize> {
    let d = tau.len();
    if d == 2 {
        return vec![0, 1];
    }
    // strongest pair seeds the path; grow greedily at both ends
    let (mut a, mut b, mut best) = (0usize, 1usize, f64::NEG_INFINITY);
    for i in 0..d {
        for j in i + 1..d {
            if tau[i][j].abs() > best {
                best = tau[i][j].abs();
                a = i;
                b = j;
            }
        }
    }
    let mut path = std::collections::VecDeque::from([a, b]);
    let mut used = vec![false; d];
    used[a] = true;
    used[b] = true;
    while path.len() < d {
        let head = *path.front().unwrap();
        let tail = *path.back().unwrap();
        let mut pick: Option<(bool, usize, f64)> = None; // (front?, var, w)
        for v in 0..d {
            if used[v] {
                continue;
            }
            for (is_front, end) in [(true, head), (false, tail)] {
                let w = tau[v][end].abs();
                if pick.map(|(_, _, pw)| w > pw).unwrap_or(true) {
                    pick = Some((is_front, v, w));
                }
            }
        }
        let (front, v, _) = pick.unwrap();
        used[v] = true;
        if front {
            path.push_front(v);
        } else {
            path.push_back(v);
        }
    }
    path.into_iter().collect()
}

/// Maximum spanning tree by Prim's algorithm over an admissibility mask.
/// Returns chosen (i, j) node-index pairs. Deterministic: first maximum
/// wins, scanning in index order.
fn max_spanning_tree(n: usize, weight: &dyn Fn(usize, usize) -> Option<f64>) -> Result<Vec<(usize, usize)>> {
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !in_tree[i] {
                continue;
            }
            for j in 0..n {
                if in_tree[j] {
                    continue;
                }
                if let Some(w) = weight(i, j) {
                    if best.map(|(_, _, bw)| w > bw).unwrap_or(true) {
                        best = Some((i, j, w));
                    }
                }
            }
        }
        let (i, j, _) = best.ok_or_else(|| Error::InvalidData("proximity graph disconnected".into()))?;
        in_tree[j] = true;
        edges.push((i, j));
    }
    Ok(edges)
}

/// Gaussian h-transform with tau-inverted correlation, used only to
/// propagate pseudo-observations during structure selection.
fn gaussian_pseudo(z1: &[f64], z2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let tau = kendall_tau(z1, z2)?;
    let rho = (std::f64::consts::PI * tau / 2.0).sin().clamp(-0.999, 0.999);
    let spec = BicopSpec::new(FamilyId::Gaussian, Rotation::R0, vec![rho])?;
    let mut a = Vec::with_capacity(z1.len());
    let mut b = Vec::with_capacity(z1.len());
    for k in 0..z1.len() {
        a.push(hfunc1(z1[k], z2[k], &spec)?);
        b.push(hfunc2(z1[k], z2[k], &spec)?);
    }
    Ok((a, b))
}

/// A node of the tree under construction: constraint set plus the two
/// conditional margins it can hand to the next tree.
struct Node {
    constraint: BTreeSet<usize>,
    margins: Vec<(usize, Vec<f64>)>, // (conditioned variable, its data)
}

fn rvine_trees(u: &DMatrix<f64>, tau: &[Vec<f64>]) -> Result<Vec<(usize, (usize, usize), Vec<usize>)>> {
    let d = u.ncols();
    let mut out = Vec::new();

    // tree 1 over raw variables
    let t1 = max_spanning_tree(d, &|i, j| Some(tau[i][j].abs()))?;
    let mut nodes: Vec<Node> = Vec::new();
    for &(a, b) in &t1 {
        out.push((1usize, (a, b), Vec::new()));
        let za: Vec<f64> = u.column(a).iter().copied().collect();
        let zb: Vec<f64> = u.column(b).iter().copied().collect();
        let (fa_given_b, fb_given_a) = gaussian_pseudo(&za, &zb)?;
        nodes.push(Node {
            constraint: BTreeSet::from([a, b]),
            margins: vec![(a, fa_given_b), (b, fb_given_a)],
        });
    }

    for level in 2..d {
        let m = nodes.len();
        // admissible node pairs share all but one variable on each side
        let weight = |i: usize, j: usize| -> Option<f64> {
            let (ni, nj) = (&nodes[i], &nodes[j]);
            let inter: BTreeSet<usize> = ni.constraint.intersection(&nj.constraint).copied().collect();
            if inter.len() != level - 1 {
                return None;
            }
            let x = *ni.constraint.difference(&inter).next()?;
            let y = *nj.constraint.difference(&inter).next()?;
            let zx = &ni.margins.iter().find(|(v, _)| *v == x)?.1;
            let zy = &nj.margins.iter().find(|(v, _)| *v == y)?.1;
            kendall_tau(zx, zy).ok().map(|t| t.abs())
        };
        let chosen = max_spanning_tree(m, &weight)?;
        let mut next_nodes = Vec::with_capacity(m - 1);
        for &(i, j) in &chosen {
            let (ni, nj) = (&nodes[i], &nodes[j]);
            let inter: BTreeSet<usize> = ni.constraint.intersection(&nj.constraint).copied().collect();
            let x = *ni.constraint.difference(&inter).next().unwrap();
            let y = *nj.constraint.difference(&inter).next().unwrap();
            let cond: Vec<usize> = inter.iter().copied().collect();
            out.push((level, (x, y), cond));
            let zx = ni.margins.iter().find(|(v, _)| *v == x).unwrap().1.clone();
            let zy = nj.margins.iter().find(|(v, _)| *v == y).unwrap().1.clone();
            let (fx, fy) = gaussian_pseudo(&zx, &zy)?;
            let mut constraint = inter;
            constraint.insert(x);
            constraint.insert(y);
            next_nodes.push(Node { constraint, margins: vec![(x, fx), (y, fy)] });
        }
        nodes = next_nodes;
    }
    Ok(out)
}

/// Select a vine structure of the given kind from uniform data.
pub fn select_order(u: &DMatrix<f64>, kind: VineKind) -> Result<VineStructure> {
    let d = u.ncols();
    if d < 2 {
        return Err(Error::InvalidData("need at least 2 variables".into()));
    }
    let tau = tau_matrix(u)?;
    match kind {
        VineKind::Cvine => VineStructure::cvine(&cvine_order(&tau)),
        VineKind::Dvine => VineStructure::dvine(&dvine_order(&tau)),
        VineKind::Rvine => {
            let trees = rvine_trees(u, &tau)?;
            VineStructure::rvine_from_trees(d, trees)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Build a 3-column uniform sample with controlled pairwise taus by
    /// mixing Gaussian copula draws.
    fn sample_with_taus() -> DMatrix<f64> {
        use crate::bicop::bicop_sample;
        // pair (0,1) strong, (0,2) medium, (1,2) weak
        let s01 = BicopSpec::new(FamilyId::Gaussian, Rotation::R0, vec![0.95]).unwrap();
        let n = 800;
        let draws = bicop_sample(n, &s01, 5).unwrap();
        let mut u = DMatrix::zeros(n, 3);
        let s02 = BicopSpec::new(FamilyId::Gaussian, Rotation::R0, vec![0.80]).unwrap();
        for (r, &(a, b)) in draws.iter().enumerate() {
            u[(r, 0)] = a;
            u[(r, 1)] = b;
            // draw 2 conditionally on 0 so that (1,2) is weakest
            let w = ((r as f64) * 0.618033988749895).fract().clamp(1e-6, 1.0 - 1e-6);
            u[(r, 2)] = crate::bicop::hfunc1_inv(w, a, &s02).unwrap();
        }
        u
    }

    #[test]
    fn cvine_root_maximizes_total_tau() {
        // |tau|: 12: 0.8, 13: 0.6, 23: 0.1 -> scores 1.4, 0.9, 0.7
        let tau = vec![
            vec![0.0, 0.8, 0.6],
            vec![0.8, 0.0, 0.1],
            vec![0.6, 0.1, 0.0],
        ];
        assert_eq!(cvine_order(&tau), vec![0, 1, 2]);
    }

    #[test]
    fn rvine_tree1_is_max_spanning_tree() {
        // enumerate all 3 spanning trees on 3 nodes: best = {01, 02}
        let tau: Vec<Vec<f64>> = vec![
            vec![0.0, 0.8, 0.6],
            vec![0.8, 0.0, 0.1],
            vec![0.6, 0.1, 0.0],
        ];
        let t = max_spanning_tree(3, &|i, j| Some(tau[i][j].abs())).unwrap();
        let set: std::collections::BTreeSet<(usize, usize)> =
            t.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        assert_eq!(set, std::collections::BTreeSet::from([(0, 1), (0, 2)]));
    }

    #[test]
    fn dvine_path_from_strongest_pair() {
        let tau = vec![
            vec![0.0, 0.8, 0.6],
            vec![0.8, 0.0, 0.1],
            vec![0.6, 0.1, 0.0],
        ];
        let path = dvine_order(&tau);
        // strongest pair (0,1) seeds; 2 attaches to 0 (0.6 > 0.1)
        assert_eq!(path, vec![2, 0, 1]);
    }

    #[test]
    fn selected_structures_are_valid() {
        let u = sample_with_taus();
        for kind in [VineKind::Cvine, VineKind::Dvine, VineKind::Rvine] {
            let s = select_order(&u, kind).unwrap();
            assert_eq!(s.kind, kind);
            assert_eq!(s.trees.len(), 2);
            super::super::structure::check_proximity(&s.trees, 3).unwrap();
        }
    }

    #[test]
    fn d2_all_kinds_coincide() {
        let u = DMatrix::from_fn(100, 2, |r, c| ((r * 7 + c * 13) % 100) as f64 / 100.0 + 0.005);
        for kind in [VineKind::Cvine, VineKind::Dvine, VineKind::Rvine] {
            let s = select_order(&u, kind).unwrap();
            assert_eq!(s.trees[0].len(), 1);
            let e = &s.trees[0][0];
            assert!(e.conditioning.is_empty());
        }
    }

    #[test]
    fn d1_errors() {
        let u = DMatrix::from_element(50, 1, 0.3);
        assert!(select_order(&u, VineKind::Cvine).is_err());
    }
}
