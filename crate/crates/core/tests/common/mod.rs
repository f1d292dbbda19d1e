#![allow(dead_code)]

use kstab_core::exact::{linalg, q, Rational};
use kstab_core::zariski::{decompose, sweep, volume};
use kstab_core::{build_blowup_plane, build_blowup_quadric, DivisorClass, SurfaceModel};
use rand::Rng;

pub fn models() -> Vec<SurfaceModel> {
    let mut out: Vec<SurfaceModel> = (1..=6).map(|n| build_blowup_plane(n).unwrap()).collect();
    out.extend((0..=6).map(|k| build_blowup_quadric(k).unwrap()));
    out
}

/// A pseudoeffective class: nonnegative combination of generators plus a multiple of -K.
pub fn random_effective(m: &SurfaceModel, rng: &mut impl Rng) -> DivisorClass {
    let mut d = m.anticanonical().scale(&q(rng.gen_range(0..4), rng.gen_range(1..3)));
    for g in m.mori_generators() {
        if rng.gen_bool(0.3) {
            d = d.add(&g.scale(&q(rng.gen_range(0..5), rng.gen_range(1..4)))).unwrap();
        }
    }
    d
}

pub fn random_class(m: &SurfaceModel, rng: &mut impl Rng) -> DivisorClass {
    let coeffs: Vec<Rational> = (0..m.basis().len()).map(|_| q(rng.gen_range(-4..7), rng.gen_range(1..3))).collect();
    DivisorClass::new(m.basis(), coeffs).unwrap()
}

fn nef_on_generators(m: &SurfaceModel, p: &DivisorClass) -> bool {
    m.mori_generators().all(|g| !m.pair(p, g).unwrap().is_negative())
}

/// D = P + N with P nef, P.C = 0 on the support, positive coefficients and a
/// negative definite support; P decomposes trivially.
pub fn check_contract(m: &SurfaceModel, d: &DivisorClass) -> Result<(), String> {
    let dec = decompose(m, d).map_err(|e| e.to_string())?;
    let mut sum = dec.positive.clone();
    for (c, a) in &dec.negative_support {
        if !a.is_positive() {
            return Err(format!("{d}: coefficient {a} on {c}"));
        }
        if !m.pair(&dec.positive, c).unwrap().is_zero() {
            return Err(format!("{d}: P.{c} != 0"));
        }
        sum = sum.add(&c.scale(a)).unwrap();
    }
    if &sum != d {
        return Err(format!("{d}: P + N = {sum}"));
    }
    if !nef_on_generators(m, &dec.positive) {
        return Err(format!("{d}: P not nef"));
    }
    let gram: Vec<Vec<Rational>> = dec
        .negative_support
        .iter()
        .map(|(a, _)| dec.negative_support.iter().map(|(b, _)| m.pair(a, b).unwrap()).collect())
        .collect();
    if !gram.is_empty() && !linalg::is_negative_definite(&gram) {
        return Err(format!("{d}: support not negative definite"));
    }
    if !decompose(m, &dec.positive).unwrap().negative_support.is_empty() {
        return Err(format!("{d}: P has a negative part"));
    }
    if volume(m, d) != m.pair(&dec.positive, &dec.positive).unwrap() {
        return Err(format!("{d}: vol != P^2"));
    }
    Ok(())
}

/// Sweep of D - vZ: chambers tile [0, threshold], the volume is continuous at
/// every wall, vanishes at the threshold and agrees with pointwise decomposition.
pub fn check_sweep(m: &SurfaceModel, d: &DivisorClass, z: &DivisorClass) -> Result<(), String> {
    let s = sweep(m, d, z).map_err(|e| e.to_string())?;
    if s.walls.first() != Some(&Rational::ZERO) || s.walls.last() != Some(&s.effective_threshold) {
        return Err(format!("{d} - v{z}: walls {:?}", s.walls));
    }
    for w in s.chambers.windows(2) {
        if w[0].hi != w[1].lo || w[0].volume.eval(&w[0].hi) != w[1].volume.eval(&w[1].lo) {
            return Err(format!("{d} - v{z}: jump at {}", w[0].hi));
        }
    }
    let last = s.chambers.last().unwrap();
    if !last.volume.eval(&last.hi).is_zero() {
        return Err(format!("{d} - v{z}: nonzero volume at threshold"));
    }
    for c in &s.chambers {
        let mid = (&c.lo + &c.hi) / q(2, 1);
        if c.volume.eval(&mid) != volume(m, &d.sub(&z.scale(&mid)).unwrap()) {
            return Err(format!("{d} - v{z}: chamber polynomial disagrees at {mid}"));
        }
    }
    Ok(())
}

pub fn check_brute_force(m: &SurfaceModel, d: &DivisorClass) -> Result<(), String> {
    let exact = volume(m, d).to_f64();
    let oracle = brute_force_volume(m, d);
    if (exact - oracle).abs() <= 1e-9 * (1.0 + oracle.abs()) {
        Ok(())
    } else {
        Err(format!("{d}: {exact} vs {oracle}"))
    }
}

// ---- brute-force oracle in floating point, with its own elimination

pub fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn negative_definite(g: &[Vec<f64>]) -> bool {
    // Cholesky on -g
    let n = g.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let v = -g[i][i] - s;
                if v <= 1e-12 {
                    return false;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = (-g[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

pub fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        let mut more = Vec::new();
        for s in &out {
            if s.len() < max {
                let mut t = s.clone();
                t.push(i);
                more.push(t);
            }
        }
        out.extend(more);
    }
    out
}

/// max (D - Σ a_i C_i)² over supports with negative definite Gram matrix, a_i ≥ 0 and
/// the remainder nef on the Mori generators.
pub fn brute_force_volume(m: &SurfaceModel, d: &DivisorClass) -> f64 {
    let gram: Vec<Vec<f64>> = m.form().gram().iter().map(|r| r.iter().map(Rational::to_f64).collect()).collect();
    let pair = |x: &[f64], y: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in 0..y.len() {
                s += gram[i][j] * x[i] * y[j];
            }
        }
        s
    };
    let f = |c: &DivisorClass| -> Vec<f64> { c.coeffs().iter().map(Rational::to_f64).collect() };
    let curves: Vec<Vec<f64>> = m.negative_curves().iter().map(f).collect();
    let gens: Vec<Vec<f64>> = m.mori_generators().map(f).collect();
    let dv = f(d);
    let rank = m.basis().len();
    let mut best: f64 = 0.0;
    for s in subsets(curves.len(), rank - 1) {
        let g: Vec<Vec<f64>> = s.iter().map(|&i| s.iter().map(|&j| pair(&curves[i], &curves[j])).collect()).collect();
        if !s.is_empty() && !negative_definite(&g) {
            continue;
        }
        let rhs: Vec<f64> = s.iter().map(|&i| pair(&dv, &curves[i])).collect();
        let a = if s.is_empty() { vec![] } else { gauss(g, rhs).unwrap() };
        if a.iter().any(|&x| x < -1e-9) {
            continue;
        }
        let mut p = dv.clone();
        for (k, &i) in s.iter().enumerate() {
            for (pc, cc) in p.iter_mut().zip(&curves[i]) {
                *pc -= a[k] * cc;
            }
        }
        if gens.iter().any(|g| pair(&p, g) < -1e-9) {
            continue;
        }
        best = best.max(pair(&p, &p));
    }
    best
}

