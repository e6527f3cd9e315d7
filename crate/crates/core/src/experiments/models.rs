//! Target models: the Ishigami function and a damped Duffing oscillator.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

/// `sin(πy₁) + a sin²(πy₂) + b (πy₃)⁴ sin(πy₁)`.
pub fn ishigami(y: &[f64], a: f64, b: f64) -> f64 {
    let s1 = (PI * y[0]).sin();
    let s2 = (PI * y[1]).sin();
    s1 + a * s2 * s2 + b * (PI * y[2]).powi(4) * s1
}

/// Coefficients `(ω₁, ω₂, ω₃)` of the oscillator at parameter `y`.
pub fn duffing_omegas(y: &[f64]) -> [f64; 3] {
    [
        2.0 * PI * (1.0 + 0.2 * y[0]),
        0.05 * (1.0 + 0.05 * y[1]),
        -0.5 * (1.0 + 0.5 * y[2]),
    ]
}

/// Integrates `ü + 2ω₁ω₂u̇ + ω₁²(u + ω₃u³) = 0`, `u(0) = 1`, `u̇(0) = 0`
/// with classical RK4 and returns `u(t_final)`.
///
/// The step is shrunk to `t_final / round(t_final / step)` so the last step
/// lands exactly on `t_final`.
pub fn duffing_response(omega: [f64; 3], t_final: f64, step: f64) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::ParameterRange(format!("step must be positive, got {step}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::ParameterRange(format!("t_final must be >= 0, got {t_final}")));
    }
    let n = (t_final / step).round().max(1.0) as usize;
    let h = t_final / n as f64;
    let [w1, w2, w3] = omega;
    let accel = |u: f64, v: f64| -2.0 * w1 * w2 * v - w1 * w1 * (u + w3 * u * u * u);
    let (mut u, mut v) = (1.0f64, 0.0f64);
    for i in 0..n {
        let (k1u, k1v) = (v, accel(u, v));
        let (k2u, k2v) = (v + 0.5 * h * k1v, accel(u + 0.5 * h * k1u, v + 0.5 * h * k1v));
        let (k3u, k3v) = (v + 0.5 * h * k2v, accel(u + 0.5 * h * k2u, v + 0.5 * h * k2v));
        let (k4u, k4v) = (v + h * k3v, accel(u + h * k3u, v + h * k3v));
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !(u.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite((i + 1) as f64 * h));
        }
    }
    Ok(u)
}

/// `u(y, t_final)` for the parametrized oscillator.
pub fn duffing_qoi(y: &[f64], t_final: f64, step: f64) -> Result<f64> {
    duffing_response(duffing_omegas(y), t_final, step)
}
