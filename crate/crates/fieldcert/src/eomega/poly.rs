//! Complex polynomial arithmetic and argument-principle root isolation by
//! rectangle subdivision.

use num_complex::Complex64;

/// Coefficients in ascending degree order.
pub type Poly = Vec<Complex64>;

pub fn poly_eval(p: &[Complex64], t: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in p.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Poly {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_add(a: &[Complex64], b: &[Complex64]) -> Poly {
    let n = a.len().max(b.len());
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

pub fn poly_scale(a: &[Complex64], s: Complex64) -> Poly {
    a.iter().map(|c| c * s).collect()
}

pub fn poly_derivative(a: &[Complex64]) -> Poly {
    if a.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    a.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Complex64::new(i as f64, 0.0))
        .collect()
}

/// Drop negligible leading coefficients.
pub fn poly_trim(mut a: Poly) -> Poly {
    let scale = a.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    while a.len() > 1 && a.last().unwrap().norm() < 1e-14 * scale {
        a.pop();
    }
    a
}

/// Cauchy bound on root magnitudes.
pub fn root_bound(a: &[Complex64]) -> f64 {
    let lead = a.last().map(|c| c.norm()).unwrap_or(1.0).max(1e-300);
    1.0 + a[..a.len() - 1]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        / lead
}

/// Fujiwara bound on root magnitudes; much tighter than Cauchy when the
/// coefficients are unbalanced.
pub fn fujiwara_bound(a: &[Complex64]) -> f64 {
    let n = a.len() - 1;
    let lead = a[n].norm().max(1e-300);
    let mut b: f64 = 0.0;
    for k in 0..n {
        let mut ratio = a[k].norm() / lead;
        if k == 0 {
            ratio *= 0.5;
        }
        b = b.max(ratio.powf(1.0 / (n - k) as f64));
    }
    2.0 * b + 1e-6
}

/// Relative backward error of `t` as a root: `|p(t)| / sum |a_i| |t|^i`.
pub fn backward_error(p: &[Complex64], t: Complex64) -> f64 {
    let mut mag = 0.0;
    let mut pow = 1.0;
    for c in p {
        mag += c.norm() * pow;
        pow *= t.norm();
    }
    poly_eval(p, t).norm() / mag.max(1e-300)
}

/// All roots by Durand-Kerner simultaneous iteration, polished by Newton.
/// Robust for the moderate degrees used here; multiple roots come out as
/// clusters of nearby values.
pub fn all_roots(p: &[Complex64]) -> Vec<Complex64> {
    let p = poly_trim(p.to_vec());
    let n = p.len() - 1;
    if n == 0 {
        return vec![];
    }
    if n == 1 {
        return vec![-p[0] / p[1]];
    }
    // Monic normalization.
    let lead = p[n];
    let monic: Vec<Complex64> = p.iter().map(|c| c / lead).collect();
    let r = fujiwara_bound(&p).min(root_bound(&p));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n as f64 + 0.7;
            Complex64::from_polar(0.7 * r * (0.5 + 0.5 * (k as f64 + 1.0) / n as f64), th)
        })
        .collect();
    for _ in 0..600 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let zi = z[i];
            let mut denom = Complex64::new(1.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if i != j {
                    denom *= zi - zj;
                }
            }
            if denom.norm() < 1e-280 {
                // Nudge coincident iterates apart.
                z[i] += Complex64::new(1e-8 * (1.0 + zi.norm()), 1e-8);
                continue;
            }
            let step = poly_eval(&monic, zi) / denom;
            z[i] = zi - step;
            max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
        }
        if max_step < 1e-14 {
            break;
        }
    }
    // Newton polish against the original polynomial.
    let dp = poly_derivative(&p);
    for zi in z.iter_mut() {
        *zi = polish(&p, &dp, *zi);
    }
    z
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
            Complex64::new(self.x0, self.y1),
        ]
    }

    fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    fn size(&self) -> f64 {
        (self.x1 - self.x0).max(self.y1 - self.y0)
    }
}

/// Winding of `p` along one edge, by adaptive argument tracking. Accepting a
/// segment from its endpoint ratio alone aliases full turns, so segments are
/// force-split to `min_depth` (degree-dependent) before the angle criterion
/// applies. Returns `None` when the edge passes too close to a zero.
fn edge_arg_change(
    p: &[Complex64],
    a: Complex64,
    b: Complex64,
    scale: f64,
    min_depth: usize,
) -> Option<f64> {
    let mut stack = vec![(a, b, poly_eval(p, a), poly_eval(p, b), 0usize)];
    let mut total = 0.0;
    while let Some((u, v, pu, pv, depth)) = stack.pop() {
        if pu.norm() < 1e-13 * scale || pv.norm() < 1e-13 * scale {
            return None;
        }
        let d = (pv / pu).arg();
        if d.abs() < std::f64::consts::FRAC_PI_2 && depth >= min_depth {
            total += d;
            continue;
        }
        if depth > 52 {
            return None;
        }
        let mid = (u + v) * 0.5;
        let pm = poly_eval(p, mid);
        stack.push((u, mid, pu, pm, depth + 1));
        stack.push((mid, v, pm, pv, depth + 1));
    }
    Some(total)
}

fn winding_number(p: &[Complex64], r: &Rect, scale: f64) -> Option<i64> {
    // Enough forced subdivision that an aliased full turn would require a
    // root within a fraction of a segment of the edge, which the small-value
    // guard then catches.
    let degree = p.len().saturating_sub(1).max(1);
    let min_depth = (((4 * degree) as f64).log2().ceil() as usize).clamp(5, 12);
    let c = r.corners();
    let mut total = 0.0;
    for k in 0..4 {
        total += edge_arg_change(p, c[k], c[(k + 1) % 4], scale, min_depth)?;
    }
    let w = total / std::f64::consts::TAU;
    let rounded = w.round();
    if (w - rounded).abs() > 0.25 {
        return None;
    }
    Some(rounded as i64)
}

/// Newton polish on `p` from `start`.
fn polish(p: &[Complex64], dp: &[Complex64], start: Complex64) -> Complex64 {
    let mut t = start;
    for _ in 0..100 {
        let f = poly_eval(p, t);
        let d = poly_eval(dp, t);
        if d.norm() < 1e-300 {
            break;
        }
        let step = f / d;
        t -= step;
        if step.norm() < 1e-14 * (1.0 + t.norm()) {
            break;
        }
    }
    t
}

/// Winding with boundary perturbation when a zero sits too close to an edge.
fn winding_robust(p: &[Complex64], r: &Rect, scale: f64) -> Option<i64> {
    let mut rect = *r;
    for k in 0..6 {
        if let Some(w) = winding_number(p, &rect, scale) {
            return Some(w);
        }
        let pad = r.size() * (3e-3 * (k as f64 + 1.0));
        rect = Rect {
            x0: r.x0 - pad,
            x1: r.x1 + pad * 1.3,
            y0: r.y0 - pad * 0.7,
            y1: r.y1 + pad * 1.1,
        };
    }
    None
}

/// Split ratios chosen so subdivision lines avoid symmetric root layouts;
/// an even-multiplicity zero exactly on a split line is invisible to the
/// boundary argument, so counts are checked for conservation across children.
const SPLIT_RATIOS: [f64; 3] = [0.500_013_781_3, 0.473_190_318_7, 0.529_311_087_1];

/// All roots of `p` inside the rectangle `[x0, x1] x [y0, y1]`, isolated by
/// winding-number subdivision and polished by Newton. Multiplicities are
/// reported once per root.
/// Argument-principle zero count over a rectangle (None when a zero is too
/// close to the boundary to resolve).
pub fn winding_in_rectangle(p: &[Complex64], x0: f64, x1: f64, y0: f64, y1: f64) -> Option<i64> {
    let p = poly_trim(p.to_vec());
    let scale = p.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    winding_number(&p, &Rect { x0, x1, y0, y1 }, scale)
}

pub fn roots_in_rectangle(
    p: &[Complex64],
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    tol: f64,
) -> Vec<Complex64> {
    let p = poly_trim(p.to_vec());
    if p.len() <= 1 {
        return vec![];
    }
    let dp = poly_derivative(&p);
    let scale = p.iter().map(|c| c.norm()).fold(1e-300, f64::max);
    let mut roots: Vec<Complex64> = vec![];
    let push_root = |t: Complex64, roots: &mut Vec<Complex64>| {
        if roots.iter().all(|r| (*r - t).norm() > 10.0 * tol) {
            roots.push(t);
        }
    };
    let mut stack = vec![Rect { x0, x1, y0, y1 }];
    let mut guard = 0usize;
    while let Some(rect) = stack.pop() {
        guard += 1;
        if guard > 400_000 {
            break;
        }
        let w = winding_robust(&p, &rect, scale);
        match w {
            Some(0) => continue,
            Some(count) if count < 0 => continue,
            Some(count) => {
                if rect.size() < tol {
                    // A multiplicity cluster polishes to one representative.
                    let t = polish(&p, &dp, rect.center());
                    push_root(t, &mut roots);
                    continue;
                }
                // Split the longer side, verifying the children conserve the
                // parent count; retry with shifted ratios otherwise.
                let horizontal = rect.x1 - rect.x0 >= rect.y1 - rect.y0;
                let mut done = false;
                for ratio in SPLIT_RATIOS {
                    let (c1, c2) = if horizontal {
                        let xm = rect.x0 + ratio * (rect.x1 - rect.x0);
                        (Rect { x1: xm, ..rect }, Rect { x0: xm, ..rect })
                    } else {
                        let ym = rect.y0 + ratio * (rect.y1 - rect.y0);
                        (Rect { y1: ym, ..rect }, Rect { y0: ym, ..rect })
                    };
                    let w1 = winding_robust(&p, &c1, scale);
                    let w2 = winding_robust(&p, &c2, scale);
                    if let (Some(a), Some(b)) = (w1, w2) {
                        if a + b == count {
                            if a > 0 {
                                stack.push(c1);
                            }
                            if b > 0 {
                                stack.push(c2);
                            }
                            done = true;
                            break;
                        }
                    }
                }
                if !done {
                    // Unresolvable split: fall back to a Newton polish from
                    // the center so the root is not silently dropped.
                    let t = polish(&p, &dp, rect.center());
                    if backward_error(&p, t) < 1e-11 {
                        push_root(t, &mut roots);
                    }
                }
            }
            None => {
                if rect.size() < tol {
                    let t = polish(&p, &dp, rect.center());
                    if backward_error(&p, t) < 1e-11 {
                        push_root(t, &mut roots);
                    }
                } else {
                    // Could not resolve the boundary; subdivide blindly.
                    let horizontal = rect.x1 - rect.x0 >= rect.y1 - rect.y0;
                    if horizontal {
                        let xm = rect.x0 + SPLIT_RATIOS[0] * (rect.x1 - rect.x0);
                        stack.push(Rect { x1: xm, ..rect });
                        stack.push(Rect { x0: xm, ..rect });
                    } else {
                        let ym = rect.y0 + SPLIT_RATIOS[0] * (rect.y1 - rect.y0);
                        stack.push(Rect { y1: ym, ..rect });
                        stack.push(Rect { y0: ym, ..rect });
                    }
                }
            }
        }
    }
    // Polishing is unconstrained, so keep only roots inside the query
    // rectangle (with a small margin).
    let margin = 100.0 * tol;
    roots.retain(|t| {
        t.re >= x0 - margin && t.re <= x1 + margin && t.im >= y0 - margin && t.im <= y1 + margin
    });
    roots.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    roots.dedup_by(|a, b| (*a - *b).norm() < 10.0 * tol);
    roots
}
