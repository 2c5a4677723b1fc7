//! Roots of real polynomials up to degree three, in complex arithmetic.
//!
//! Closed forms (Cardano for cubics) seed a short Newton polish; roots that
//! land within the confluence band are re-polished jointly as a multiple
//! root so the modal evolution can switch to the `t^k e^{wt}` basis.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tol::{ROOT_CONFLUENCE_REL, ROOT_RESIDUAL_REL};

/// Evaluates a polynomial given coefficients highest-degree first.
pub fn poly_eval<T: Scalar>(coeffs: &[T], w: Complex<T>) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for &c in coeffs {
        acc = acc * w + Complex::new(c, T::zero());
    }
    acc
}

fn poly_derivative<T: Scalar>(coeffs: &[T]) -> Vec<T> {
    let n = coeffs.len() - 1; // degree
    coeffs[..n]
        .iter()
        .enumerate()
        .map(|(i, &c)| c * T::of((n - i) as f64))
        .collect()
}

/// `max(1, |w|)^degree * max|coeff|`, the natural residual scale.
pub fn residual_scale<T: Scalar>(coeffs: &[T], w: Complex<T>) -> T {
    let maxc = coeffs
        .iter()
        .fold(T::zero(), |m, &c| m.max(c.abs()))
        .max(T::epsilon());
    let deg = coeffs.len() - 1;
    maxc * T::one().max(w.norm()).powi(deg as i32)
}

/// True when the polished root satisfies the pinned residual bound.
pub fn residual_ok<T: Scalar>(coeffs: &[T], w: Complex<T>) -> bool {
    poly_eval(coeffs, w).norm() <= T::of(ROOT_RESIDUAL_REL) * residual_scale(coeffs, w)
}

fn newton_polish<T: Scalar>(coeffs: &[T], deriv: &[T], mut w: Complex<T>, mult: u32) -> Complex<T> {
    // Multiplicity-aware Newton: w <- w - m p / p'. Converges quadratically
    // to an m-fold root; plain Newton (m = 1) for simple roots.
    let m = Complex::new(T::of(mult as f64), T::zero());
    for _ in 0..8 {
        let p = poly_eval(coeffs, w);
        let dp = poly_eval(deriv, w);
        if dp.norm() <= T::epsilon() * residual_scale(deriv, w) {
            break;
        }
        let step = m * p / dp;
        w = w - step;
        if step.norm() <= T::epsilon() * T::one().max(w.norm()) {
            break;
        }
    }
    w
}

fn solve_quadratic<T: Scalar>(a: T, b: T, c: T) -> [Complex<T>; 2] {
    // Stable form: q = -(b + sign(b) sqrt(disc))/2, roots q/a and c/q.
    let disc = Complex::new(b * b - T::of(4.0) * a * c, T::zero());
    let sq = disc.sqrt();
    let bb = Complex::new(b, T::zero());
    let q = if b >= T::zero() {
        (-(bb + sq)) * Complex::new(T::half(), T::zero())
    } else {
        (-(bb - sq)) * Complex::new(T::half(), T::zero())
    };
    if q.norm() > T::zero() {
        [q / a, Complex::new(c, T::zero()) / q]
    } else {
        // b = 0 and a c = 0: both roots coincide at 0 or +-sqrt(-c/a).
        let r = (Complex::new(-c / a, T::zero())).sqrt();
        [r, -r]
    }
}

fn solve_cubic_cardano<T: Scalar>(c3: T, c2: T, c1: T, c0: T) -> [Complex<T>; 3] {
    // Normalize and depress: w = y - a/3 turns w^3+aw^2+bw+c into y^3+py+q.
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    let third = T::one() / T::of(3.0);
    let p = b - a * a * third;
    let q = a * a * a * T::of(2.0 / 27.0) - a * b * third + c;

    let pc = Complex::new(p, T::zero());
    let qc = Complex::new(q, T::zero());
    let half = Complex::new(T::half(), T::zero());
    let disc = (qc * half) * (qc * half) + (pc * third) * (pc * third) * (pc * third);
    let sq = disc.sqrt();
    // Pick the branch with the larger |u| for a stable division v = -p/(3u).
    let u3a = -qc * half + sq;
    let u3b = -qc * half - sq;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };

    let shift = Complex::new(-a * third, T::zero());
    if u3.norm() == T::zero() {
        // p = q = 0: triple root at the shift.
        return [shift, shift, shift];
    }
    let u = u3.powf(third);
    let v = -pc * Complex::new(third, T::zero()) / u;
    let omega = Complex::new(-T::half(), T::of(0.75).sqrt());
    let omega2 = omega * omega;
    [
        u + v + shift,
        omega * u + omega2 * v + shift,
        omega2 * u + omega * v + shift,
    ]
}

fn sort_roots<T: Scalar>(roots: &mut [Complex<T>]) {
    // Descending real part; ties broken by ascending imaginary part.
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .expect("finite roots")
            .then(a.im.partial_cmp(&b.im).expect("finite roots"))
    });
}

/// Solves a real polynomial of degree 1..=3 (coefficients highest-degree
/// first, leading coefficient nonzero). Roots are Newton-polished, grouped
/// into confluent clusters, and returned sorted by descending real part
/// (ties by ascending imaginary part).
pub fn solve_poly<T: Scalar>(coeffs: &[T]) -> Result<Vec<Complex<T>>> {
    if coeffs.is_empty() || coeffs[0] == T::zero() {
        return Err(Error::DegenerateCubic);
    }
    let deriv = poly_derivative(coeffs);
    let mut roots: Vec<Complex<T>> = match coeffs.len() {
        2 => vec![Complex::new(-coeffs[1] / coeffs[0], T::zero())],
        3 => solve_quadratic(coeffs[0], coeffs[1], coeffs[2]).to_vec(),
        4 => solve_cubic_cardano(coeffs[0], coeffs[1], coeffs[2], coeffs[3]).to_vec(),
        n => {
            return Err(Error::PreconditionViolated {
                op: "solve_poly",
                what: format!("degree {} not supported", n.saturating_sub(1)),
            })
        }
    };

    for r in roots.iter_mut() {
        *r = newton_polish(coeffs, &deriv, *r, 1);
    }

    // Confluence detection: cluster roots pairwise, then re-polish clusters
    // with multiplicity-aware Newton so t e^{wt} bases get an accurate w.
    let scale = roots
        .iter()
        .fold(T::one(), |m, r| m.max(r.norm()));
    let band = T::of(ROOT_CONFLUENCE_REL) * scale;
    let n = roots.len();
    if n >= 2 {
        let mut cluster = vec![usize::MAX; n];
        let mut next_id = 0usize;
        for i in 0..n {
            if cluster[i] == usize::MAX {
                cluster[i] = next_id;
                next_id += 1;
            }
            for j in (i + 1)..n {
                if (roots[i] - roots[j]).norm() < band {
                    cluster[j] = cluster[i];
                }
            }
        }
        for id in 0..next_id {
            let members: Vec<usize> = (0..n).filter(|&k| cluster[k] == id).collect();
            if members.len() < 2 {
                continue;
            }
            let mut mean = Complex::new(T::zero(), T::zero());
            for &k in &members {
                mean = mean + roots[k];
            }
            mean = mean / Complex::new(T::of(members.len() as f64), T::zero());
            let polished = if members.len() == roots.len() && roots.len() == 3 {
                // Triple root of a cubic sits at -c2/(3 c3) exactly.
                Complex::new(-coeffs[1] / (T::of(3.0) * coeffs[0]), T::zero())
            } else {
                newton_polish(coeffs, &deriv, mean, members.len() as u32)
            };
            // Real coefficients: a multiple root off the real axis would need
            // its conjugate as well, impossible below degree 4, so the
            // cluster value is real up to roundoff.
            let polished = Complex::new(polished.re, T::zero());
            for &k in &members {
                roots[k] = polished;
            }
        }
    }

    // Real-coefficient polynomials have conjugate-paired roots; strip the
    // roundoff imaginary residue from roots that are numerically real. The
    // threshold sits well below the confluence band: anything larger is
    // either a genuine conjugate pair or was already merged above.
    for r in roots.iter_mut() {
        if r.im.abs() <= T::of(1e-11) * T::one().max(r.norm()) {
            *r = Complex::new(r.re, T::zero());
        }
    }

    sort_roots(&mut roots);
    Ok(roots)
}
