//! Shipped test systems.

use crate::error::{Error, Result};
use crate::model::{Integral, State, System};
use crate::scalar::Scalar;

const MIN_RADIUS: f64 = 1e-10;

/// Orbit eccentricity for the Kepler initial condition, `0 ≤ e < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerParams {
    eccentricity: f64,
}

impl KeplerParams {
    pub fn new(eccentricity: f64) -> Result<Self> {
        if (0.0..1.0).contains(&eccentricity) {
            Ok(KeplerParams { eccentricity })
        } else {
            Err(Error::Domain(format!("eccentricity {eccentricity} outside [0, 1)")))
        }
    }

    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }
}

fn radius<T: Scalar>(x: &[T]) -> Result<T> {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r < T::lit(MIN_RADIUS) || !r.is_finite() {
        Err(Error::Singularity { radius: r.as_f64() })
    } else {
        Ok(r)
    }
}

fn energy<T: Scalar>() -> Integral<T> {
    Integral::new(
        "energy",
        |x: &[T]| {
            let r = radius(x)?;
            Ok(T::lit(0.5) * (x[2] * x[2] + x[3] * x[3]) - r.recip())
        },
        |x: &[T]| {
            let r = radius(x)?;
            let r3 = r * r * r;
            Ok(vec![x[0] / r3, x[1] / r3, x[2], x[3]])
        },
    )
}

fn angular_momentum<T: Scalar>() -> Integral<T> {
    Integral::new(
        "angular_momentum",
        |x: &[T]| Ok(x[0] * x[3] - x[1] * x[2]),
        |x: &[T]| Ok(vec![x[3], -x[2], -x[1], x[0]]),
    )
}

fn runge_lenz_y<T: Scalar>() -> Integral<T> {
    Integral::new(
        "runge_lenz_y",
        |x: &[T]| {
            let r = radius(x)?;
            Ok(x[1] * x[2] * x[2] - x[0] * x[2] * x[3] - x[1] / r)
        },
        |x: &[T]| {
            let r = radius(x)?;
            let r3 = r * r * r;
            Ok(vec![
                -x[2] * x[3] + x[0] * x[1] / r3,
                x[2] * x[2] - r.recip() + x[1] * x[1] / r3,
                T::lit(2.0) * x[1] * x[2] - x[0] * x[3],
                -x[0] * x[2],
            ])
        },
    )
}

fn runge_lenz_x<T: Scalar>() -> Integral<T> {
    Integral::new(
        "runge_lenz_x",
        |x: &[T]| {
            let r = radius(x)?;
            Ok(x[0] * x[3] * x[3] - x[1] * x[2] * x[3] - x[0] / r)
        },
        |x: &[T]| {
            let r = radius(x)?;
            let r3 = r * r * r;
            Ok(vec![
                x[3] * x[3] - r.recip() + x[0] * x[0] / r3,
                -x[2] * x[3] + x[0] * x[1] / r3,
                -x[1] * x[3],
                T::lit(2.0) * x[0] * x[3] - x[1] * x[2],
            ])
        },
    )
}

/// Planar Kepler problem `(q, p) ∈ ℝ⁴` with integrals
/// `[energy, angular momentum, Runge–Lenz y, Runge–Lenz x]`.
pub fn kepler_system<T: Scalar>() -> System<T> {
    System::new(
        4,
        |x: &[T]| {
            let r = radius(x)?;
            let r3 = r * r * r;
            Ok(vec![x[2], x[3], -x[0] / r3, -x[1] / r3])
        },
        vec![energy(), angular_momentum(), runge_lenz_y(), runge_lenz_x()],
    )
    .expect("dimension is positive")
}

/// `(1−e, 0, 0, √((1+e)/(1−e)))`, an orbit of period `2π`.
pub fn kepler_initial<T: Scalar>(p: KeplerParams) -> State<T> {
    let e = p.eccentricity();
    State::from_f64(&[1.0 - e, 0.0, 0.0, ((1.0 + e) / (1.0 - e)).sqrt()]).expect("finite for e in [0, 1)")
}

/// `q' = p, p' = −q` with `I = ½(q² + p²)`.
pub fn harmonic_oscillator<T: Scalar>() -> System<T> {
    System::new(
        2,
        |x: &[T]| Ok(vec![x[1], -x[0]]),
        vec![Integral::new(
            "energy",
            |x: &[T]| Ok(T::lit(0.5) * (x[0] * x[0] + x[1] * x[1])),
            |x: &[T]| Ok(x.to_vec()),
        )],
    )
    .expect("dimension is positive")
}
