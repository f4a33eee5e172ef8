//! Oracles shared by the integration test binaries.
#![allow(dead_code)]

use hoi::homology::{rips_persistence, FiltrationSpec, PersistenceDiagram};
use hoi::neighbors::distance_matrix;
use hoi::neighbors::{DistanceMatrix, Metric};
use hoi::PointCloud;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn minor_det(m: &[[f64; 3]; 3], drop: usize) -> f64 {
    let idx: Vec<usize> = (0..3).filter(|&j| j != drop).collect();
    m[idx[0]][idx[0]] * m[idx[1]][idx[1]] - m[idx[0]][idx[1]] * m[idx[1]][idx[0]]
}

/// Gaussian TC and DTC from log-determinants; the `2 pi e` terms cancel.
pub fn gaussian_oracle(s: &[[f64; 3]; 3]) -> (f64, f64) {
    let ld = det3(s).ln();
    let tc = 0.5 * ((0..3).map(|i| s[i][i].ln()).sum::<f64>() - ld);
    let dtc = 0.5 * ((0..3).map(|i| minor_det(s, i).ln()).sum::<f64>() - 2.0 * ld);
    (tc, dtc)
}

/// Samples N(0, s) through a hand-rolled Cholesky factor.
pub fn gaussian_cloud(s: &[[f64; 3]; 3], n: usize, seed: u64) -> PointCloud {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let sum: f64 = (0..j).map(|m| l[i][m] * l[j][m]).sum();
            l[i][j] = if i == j {
                (s[i][i] - sum).sqrt()
            } else {
                (s[i][j] - sum) / l[j][j]
            };
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        for row in &l {
            data.push(row[0] * z[0] + row[1] * z[1] + row[2] * z[2]);
        }
    }
    PointCloud::new(data, n, 3).unwrap()
}

/// Correlation matrix of `A A^T` for a 3x5 standard normal `A`.
pub fn random_correlation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let a: Vec<[f64; 5]> = (0..3)
        .map(|_| std::array::from_fn(|_| rng.sample(StandardNormal)))
        .collect();
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..5).map(|m| a[i][m] * a[j][m]).sum();
        }
    }
    let diag = [c[0][0].sqrt(), c[1][1].sqrt(), c[2][2].sqrt()];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] /= diag[i] * diag[j];
        }
    }
    c
}

/// Every vertex subset of size 1..=max_size, with its diameter.
pub fn simplices(d: &DistanceMatrix, max_size: usize, threshold: f64) -> Vec<(f64, Vec<usize>)> {
    let n = d.n();
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        if verts.len() > max_size {
            continue;
        }
        let mut diam = 0.0f64;
        for (a, &u) in verts.iter().enumerate() {
            for &v in &verts[a + 1..] {
                diam = diam.max(d.get(u, v));
            }
        }
        if diam <= threshold {
            out.push((diam, verts));
        }
    }
    out.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });
    out
}

/// Standard left-to-right reduction of the full boundary matrix over GF(2).
/// Returns sorted (dim, birth, death) triples of positive length.
pub fn naive_diagram(d: &DistanceMatrix, max_dim: usize, threshold: f64) -> Vec<(usize, f64, f64)> {
    let cells = simplices(d, max_dim + 2, threshold);
    let position: std::collections::HashMap<Vec<usize>, usize> = cells
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (v.clone(), i))
        .collect();
    let mut columns: Vec<Vec<usize>> = cells
        .iter()
        .map(|(_, v)| {
            let mut rows: Vec<usize> = if v.len() == 1 {
                Vec::new()
            } else {
                (0..v.len())
                    .map(|skip| {
                        let face: Vec<usize> =
                            v.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &x)| x).collect();
                        position[&face]
                    })
                    .collect()
            };
            rows.sort_unstable();
            rows
        })
        .collect();
    let mut low_owner: std::collections::HashMap<usize, usize> = Default::default();
    let mut paired = vec![false; cells.len()];
    let mut out = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match low_owner.get(&low) {
                Some(&i) => {
                    let other = columns[i].clone();
                    let mut merged = Vec::new();
                    let (mut a, mut b) = (0, 0);
                    let cur = &columns[j];
                    while a < cur.len() || b < other.len() {
                        if b == other.len() || (a < cur.len() && cur[a] < other[b]) {
                            merged.push(cur[a]);
                            a += 1;
                        } else if a == cur.len() || other[b] < cur[a] {
                            merged.push(other[b]);
                            b += 1;
                        } else {
                            a += 1;
                            b += 1;
                        }
                    }
                    columns[j] = merged;
                }
                None => {
                    low_owner.insert(low, j);
                    paired[low] = true;
                    paired[j] = true;
                    let dim = cells[low].1.len() - 1;
                    if cells[j].0 > cells[low].0 {
                        out.push((dim, cells[low].0, cells[j].0));
                    }
                    break;
                }
            }
        }
    }
    for (i, (diam, v)) in cells.iter().enumerate() {
        if !paired[i] && v.len() <= max_dim + 1 {
            out.push((v.len() - 1, *diam, f64::INFINITY));
        }
    }
    sort_triples(out)
}

pub fn sort_triples(mut v: Vec<(usize, f64, f64)>) -> Vec<(usize, f64, f64)> {
    v.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    v
}

pub fn triples(diag: &PersistenceDiagram) -> Vec<(usize, f64, f64)> {
    sort_triples(diag.pairs.iter().map(|p| (p.dim, p.birth, p.death)).collect())
}

/// Random symmetric matrices; half of them use a coarse value grid so that
/// many distances tie.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, coarse: bool) -> DistanceMatrix {
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = if coarse {
                rng.gen_range(1..6) as f64
            } else {
                rng.gen_range(0.01..1.0)
            };
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    DistanceMatrix::from_entries(e, n, Metric::Chebyshev).unwrap()
}

pub fn points(d: &PersistenceDiagram, dim: usize) -> Vec<(f64, f64)> {
    d.in_dim(dim).map(|p| (p.birth, p.death)).collect()
}

/// Whether a partial matching moves every point by at most `eps` (max norm,
/// unmatched points to the diagonal), by augmenting paths on the threshold
/// graph.
pub fn bottleneck_at_most(a: &[(f64, f64)], b: &[(f64, f64)], eps: f64) -> bool {
    let close = |p: (f64, f64), q: (f64, f64)| {
        let db = (p.0 - q.0).abs();
        let dd = if p.1.is_infinite() || q.1.is_infinite() {
            if p.1 == q.1 { 0.0 } else { f64::INFINITY }
        } else {
            (p.1 - q.1).abs()
        };
        db.max(dd) <= eps
    };
    let diagonal = |p: (f64, f64)| (p.1 - p.0) / 2.0 <= eps;
    // left side: a points then b's diagonal copies; right: b points then a's
    let (na, nb) = (a.len(), b.len());
    let edge = |i: usize, j: usize| -> bool {
        match (i < na, j < nb) {
            (true, true) => close(a[i], b[j]),
            (true, false) => j - nb == i && diagonal(a[i]),
            (false, true) => i - na == j && diagonal(b[j]),
            (false, false) => true,
        }
    };
    let size = na + nb;
    let mut owner: Vec<Option<usize>> = vec![None; size];
    fn augment(
        i: usize,
        size: usize,
        edge: &dyn Fn(usize, usize) -> bool,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for j in 0..size {
            if edge(i, j) && !seen[j] {
                seen[j] = true;
                if owner[j].map_or(true, |o| augment(o, size, edge, seen, owner)) {
                    owner[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    (0..size).all(|i| {
        let mut seen = vec![false; size];
        augment(i, size, &edge, &mut seen, &mut owner)
    })
}


fn random_cube_matrix(seed: u64) -> DistanceMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<[f64; 3]> = (0..60).map(|_| std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).collect();
    distance_matrix(&PointCloud::from_rows(&rows).unwrap(), Metric::Euclidean).unwrap()
}

/// Scaling every distance by a power of two scales every interval exactly.
pub fn scale_equivariance_holds(seed: u64, c: f64) -> bool {
    let d = random_cube_matrix(seed);
    let base = rips_persistence(&d, &FiltrationSpec::default()).unwrap();
    let scaled = rips_persistence(&d.scaled(c).unwrap(), &FiltrationSpec::default()).unwrap();
    let expect: Vec<_> = triples(&base).into_iter().map(|(k, b, e)| (k, b * c, e * c)).collect();
    triples(&scaled) == expect
}

/// Perturbing distances by at most `delta` moves each diagram point by at
/// most `delta` in the bottleneck matching, in every dimension.
pub fn stability_holds(seed: u64, delta: f64) -> bool {
    let d = random_cube_matrix(seed);
    let n = d.n();
    let mut e = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (i.min(j), i.max(j));
            let noise = if i == j {
                0.0
            } else {
                // symmetric pseudo-random offset in [-delta, delta]
                let h = (a * 7919 + b * 104729) % 1000;
                delta * (h as f64 / 500.0 - 1.0)
            };
            e.push(d.get(i, j) + noise);
        }
    }
    let moved = DistanceMatrix::from_entries(e, n, Metric::Euclidean).unwrap();
    let spec = FiltrationSpec {
        threshold: Some(f64::INFINITY),
        ..FiltrationSpec::default()
    };
    let p = rips_persistence(&d, &spec).unwrap();
    let q = rips_persistence(&moved, &spec).unwrap();
    (0..3).all(|dim| bottleneck_at_most(&points(&p, dim), &points(&q, dim), delta + 1e-12))
}
