//! Maxima detection and symmetry metrics on polar Husimi grids.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HusimiField;
use crate::error::{Error, Result};

/// Values within this relative gap count as equal when looking for maxima.
const TIE: f64 = 1e-12;
/// Maxima below this fraction of the global peak are ignored.
const FLOOR: f64 = 1e-10;

/// A local maximum, refined between grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Maximum {
    pub r: f64,
    pub phi: f64,
    pub value: f64,
    /// Grid node the refinement started from.
    pub node: (usize, usize),
    /// Number of grid nodes merged into this maximum.
    pub plateau: usize,
}

fn tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE * a.abs().max(b.abs())
}

/// Vertex offset of the parabola through `(−1, a)`, `(0, b)`, `(1, c)`,
/// clamped to half a cell.
fn vertex(a: f64, b: f64, c: f64) -> f64 {
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / den).clamp(-0.5, 0.5)
}

/// Neighbours of `(i, j)` with `φ` periodic.
fn neighbours(i: usize, j: usize, n_r: usize, n_phi: usize) -> impl Iterator<Item = (usize, usize)> {
    let rows = [i.checked_sub(1), Some(i), (i + 1 < n_r).then_some(i + 1)];
    rows.into_iter().flatten().flat_map(move |k| {
        [(j + n_phi - 1) % n_phi, j, (j + 1) % n_phi]
            .into_iter()
            .filter(move |&l| (k, l) != (i, j))
            .map(move |l| (k, l))
    })
}

/// Local maxima of the field, strongest first.
///
/// A node is a candidate when no neighbour is larger and at least one is
/// smaller, with equality judged to `1e-12` relative. Connected candidates
/// form one plateau maximum; its position is refined by three-point
/// parabolas in `r` and `φ` around the plateau's top node. At `r = 0` the
/// radial parabola uses the node at `φ + π` as its mirror neighbour.
pub fn find_maxima(field: &HusimiField) -> Result<Vec<Maximum>> {
    let grid = &field.grid;
    let (n_r, n_phi) = (grid.n_r(), grid.n_phi());
    let floor = FLOOR * field.peak();
    let v = |i: usize, j: usize| field.at(i, j);
    let mut candidate = vec![false; n_r * n_phi];
    for i in 0..n_r {
        for j in 0..n_phi {
            let x = v(i, j);
            if x <= floor {
                continue;
            }
            let mut lower = false;
            let mut ok = true;
            for (k, l) in neighbours(i, j, n_r, n_phi) {
                let y = v(k, l);
                if tie(x, y) {
                    continue;
                }
                if y > x {
                    ok = false;
                    break;
                }
                lower = true;
            }
            candidate[i * n_phi + j] = ok && lower;
        }
    }

    let mut seen = vec![false; n_r * n_phi];
    let mut out = Vec::new();
    for start in 0..n_r * n_phi {
        if !candidate[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let (mut top, mut count) = (start, 0);
        while let Some(idx) = queue.pop_front() {
            count += 1;
            if field.values[idx] > field.values[top] {
                top = idx;
            }
            for (k, l) in neighbours(idx / n_phi, idx % n_phi, n_r, n_phi) {
                let nb = k * n_phi + l;
                if candidate[nb] && !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        let (i, j) = (top / n_phi, top % n_phi);
        let r_values = grid.r_values();
        let r = if i == 0 {
            if n_phi % 2 == 0 && n_r > 1 && r_values[0] == 0.0 {
                let off = vertex(v(1, (j + n_phi / 2) % n_phi), v(0, j), v(1, j));
                off * r_values[1]
            } else {
                r_values[0]
            }
        } else if i + 1 < n_r {
            let off = vertex(v(i - 1, j), v(i, j), v(i + 1, j));
            let step = if off >= 0.0 { r_values[i + 1] - r_values[i] } else { r_values[i] - r_values[i - 1] };
            r_values[i] + off * step
        } else {
            r_values[i]
        };
        let off = vertex(v(i, (j + n_phi - 1) % n_phi), v(i, j), v(i, (j + 1) % n_phi));
        let dphi = 2.0 * PI / n_phi as f64;
        let (r, phi) = if r < 0.0 { (-r, grid.phi_values()[j] + PI) } else { (r, grid.phi_values()[j] + off * dphi) };
        out.push(Maximum { r, phi: phi.rem_euclid(2.0 * PI), value: v(i, j), node: (i, j), plateau: count });
    }
    if out.is_empty() {
        return Err(Error::NoMaxima);
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.node.cmp(&b.node)));
    Ok(out)
}

/// `Σ|Φ(r, φ) − Φ(r, φ + 2π/fold)| / Σ|Φ|` over the grid.
pub fn rotational_symmetry_error(field: &HusimiField, fold: usize) -> Result<f64> {
    let n_phi = field.grid.n_phi();
    if fold == 0 || !n_phi.is_multiple_of(fold) {
        return Err(Error::Divisibility { n_phi, fold });
    }
    Ok(shifted_error(field, |j| (j + n_phi / fold) % n_phi))
}

/// Reflection error under `φ → π − φ`, i.e. `X → −X`.
pub fn mirror_x_error(field: &HusimiField) -> Result<f64> {
    let n_phi = field.grid.n_phi();
    if !n_phi.is_multiple_of(2) {
        return Err(Error::Divisibility { n_phi, fold: 2 });
    }
    Ok(shifted_error(field, |j| (n_phi / 2 + n_phi - j) % n_phi))
}

fn shifted_error(field: &HusimiField, map: impl Fn(usize) -> usize) -> f64 {
    let n_phi = field.grid.n_phi();
    let mut diff = 0.0;
    let mut total = 0.0;
    for i in 0..field.grid.n_r() {
        for j in 0..n_phi {
            let a = field.at(i, j);
            diff += (a - field.at(i, map(j))).abs();
            total += a.abs();
        }
    }
    if total == 0.0 {
        0.0
    } else {
        diff / total
    }
}

/// Radius of the maximum of the angle-averaged profile.
pub fn radial_peak(field: &HusimiField) -> f64 {
    let n_phi = field.grid.n_phi();
    let r = field.grid.r_values();
    let profile: Vec<f64> =
        (0..field.grid.n_r()).map(|i| field.values[i * n_phi..(i + 1) * n_phi].iter().sum::<f64>()).collect();
    let i = (0..profile.len()).fold(0, |b, i| if profile[i] > profile[b] { i } else { b });
    if i == 0 || i + 1 == profile.len() {
        return r[i];
    }
    let off = vertex(profile[i - 1], profile[i], profile[i + 1]);
    let step = if off >= 0.0 { r[i + 1] - r[i] } else { r[i] - r[i - 1] };
    r[i] + off * step
}

/// `max |a/max(a) − b/max(b)|` for two fields on the same grid.
pub fn peak_normalized_difference(a: &HusimiField, b: &HusimiField) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Mismatch("fields live on different grids".into()));
    }
    let (pa, pb) = (a.peak(), b.peak());
    if pa <= 0.0 || pb <= 0.0 {
        return Err(Error::NoMaxima);
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| (x / pa - y / pb).abs()).fold(0.0, f64::max))
}
