//! All-roots solver for small complex polynomials (Durand-Kerner simultaneous
//! iteration). Degree here is at most six, so robustness is preferred over
//! asymptotics; the contract is a residual below `1e-10 * max|coeff|` at every
//! returned root, which the caller-side tests enforce.

use num_complex::Complex64;

/// Evaluates `c[0] + c[1] v + ... + c[n] v^n` (Horner).
pub fn eval(coeffs: &[Complex64], v: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * v + c;
    }
    acc
}

/// All complex roots of the polynomial with ascending-power coefficients.
///
/// Near-zero leading coefficients (relative to the largest) are stripped so
/// configurations that drop the effective degree do not poison the iteration.
/// Returns an empty vector for (near-)constant polynomials.
pub fn roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let max_mag = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max_mag == 0.0 {
        return Vec::new();
    }
    let mut degree = coeffs.len().saturating_sub(1);
    while degree > 0 && coeffs[degree].norm() <= 1e-14 * max_mag {
        degree -= 1;
    }
    if degree == 0 {
        return Vec::new();
    }
    let monic: Vec<Complex64> = coeffs[..=degree].iter().map(|c| c / coeffs[degree]).collect();

    // Cauchy-style radius bound keeps the start circle near the root annulus.
    let radius = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|k| seed.powu(k as u32 + 1) * radius.min(2.0))
        .collect();

    for _ in 0..500 {
        let mut worst = 0.0f64;
        for i in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..degree {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // Collided guesses; nudge apart deterministically.
                z[i] += Complex64::new(1e-8, 1e-8) * (i as f64 + 1.0);
                worst = f64::INFINITY;
                continue;
            }
            let delta = eval(&monic, z[i]) / denom;
            z[i] -= delta;
            worst = worst.max(delta.norm() / (1.0 + z[i].norm()));
        }
        if worst < 1e-15 {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn from_roots(rs: &[Complex64]) -> Vec<Complex64> {
        let mut coeffs = vec![c(1.0, 0.0)];
        for r in rs {
            let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
            for (k, a) in coeffs.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * r;
            }
            coeffs = next;
        }
        // ascending coefficients of prod (v - r)
        coeffs
    }

    #[test]
    fn recovers_known_roots() {
        let truth = vec![c(1.0, 0.0), c(-2.0, 0.5), c(0.0, -1.5), c(3.0, 3.0), c(-0.25, 0.0), c(0.7, -0.7)];
        let coeffs = from_roots(&truth);
        let got = roots(&coeffs);
        assert_eq!(got.len(), truth.len());
        for w in &truth {
            let nearest = got.iter().map(|g| (g - w).norm()).fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "no computed root near {w}");
        }
    }

    #[test]
    fn residual_bound_holds() {
        let coeffs: Vec<Complex64> = [
            (3.0, -1.0),
            (0.5, 2.0),
            (-4.0, 0.1),
            (2.2, 0.0),
            (-0.3, -0.9),
            (1.0, 1.0),
            (0.25, -0.5),
        ]
        .iter()
        .map(|&(re, im)| c(re, im))
        .collect();
        let max_mag = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for r in roots(&coeffs) {
            assert!(eval(&coeffs, r).norm() < 1e-10 * max_mag);
        }
    }

    #[test]
    fn strips_vanishing_leading_coefficient() {
        // effectively quadratic: (v-2)(v+1), with two zero top coefficients
        let coeffs = vec![c(-2.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let got = roots(&coeffs);
        assert_eq!(got.len(), 2);
        for r in got {
            assert!((r - c(2.0, 0.0)).norm() < 1e-9 || (r - c(-1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn empty_for_constant() {
        assert!(roots(&[c(3.0, 0.0)]).is_empty());
        assert!(roots(&[]).is_empty());
    }
}
