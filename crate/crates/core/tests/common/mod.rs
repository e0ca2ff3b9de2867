//! Reference computations shared by the oracle and acceptance tests.

#![allow(dead_code)]

use tpespec::quantumwell::infinite_well_energy;

// Constants typed in separately from the library's.
pub const Q: f64 = 1.602176634e-19;
pub const ME: f64 = 9.1093837015e-31;
pub const EPS: f64 = 8.8541878128e-12;
pub const C: f64 = 2.99792458e8;
pub const HB: f64 = 1.054571817e-34;
pub const KB: f64 = 1.380649e-23;

/// (2/√π)·∫₀^∞ √x/(1+e^{x−η}) dx by composite Simpson in u = √x.
pub fn fd_half_simpson(eta: f64) -> f64 {
    let u_max = (eta.max(0.0) + 45.0).sqrt();
    let n = 20_000;
    let h = u_max / n as f64;
    let g = |u: f64| 2.0 * u * u / (1.0 + (u * u - eta).exp());
    let mut s = g(0.0) + g(u_max);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
}

pub fn eta_by_bisection(ratio: f64) -> f64 {
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if fd_half_simpson(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Even ground state by integrating the effective-mass equation outward
/// from the well center, ψ' / m continuous at the interfaces, and bisecting
/// on the sign of ψ far into the barrier.
pub fn shooting_ground_state(l_a: f64, v: f64, m_w: f64, m_b: f64) -> f64 {
    let l = l_a * 1e-10;
    let far_end = |e: f64| -> f64 {
        let kappa = (2.0 * m_b * ME * (v - e) * Q).sqrt() / HB;
        let x_far = 0.5 * l + 14.0 / kappa;
        // state (ψ, J = ψ'/m); dψ/dx = m J, dJ/dx = 2(V − E)ψ/ħ² (SI, masses in kg)
        let deriv = |x: f64, psi: f64, j: f64| -> (f64, f64) {
            let (m, pot) = if x < 0.5 * l { (m_w * ME, 0.0) } else { (m_b * ME, v) };
            (m * j, 2.0 * (pot - e) * Q * psi / (HB * HB))
        };
        let mut x = 0.0;
        let (mut psi, mut j) = (1.0, 0.0);
        for (end, steps) in [(0.5 * l, 4000), (x_far, 6000)] {
            let h = (end - x) / steps as f64;
            for _ in 0..steps {
                // interior midpoint keeps each step inside one region
                let xm = x + 0.5 * h;
                let (a1, b1) = deriv(xm, psi, j);
                let (a2, b2) = deriv(xm, psi + 0.5 * h * a1, j + 0.5 * h * b1);
                let (a3, b3) = deriv(xm, psi + 0.5 * h * a2, j + 0.5 * h * b2);
                let (a4, b4) = deriv(xm, psi + h * a3, j + h * b3);
                psi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
                j += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
                x += h;
            }
        }
        psi
    };
    let (mut lo, mut hi) = (1e-9, v.min(infinite_well_energy(l_a, m_w)) * (1.0 - 1e-12));
    assert!(far_end(lo) > 0.0 && far_end(hi) < 0.0);
    for _ in 0..70 {
        let mid = 0.5 * (lo + hi);
        if far_end(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
