//! Named method configurations for the Kepler experiments.

use linproj::{
    make_dahlby, make_standard_projection, make_symmetric_projection, DahlbyVariant, DgSpec, DirectionRule,
    DiscreteGradientKind, Integrator, ProjectionSpec, StandardVersion, Underlying,
};

use crate::error::HarnessError;

pub const PRESET_NAMES: [&str; 17] = [
    "rk4",
    "rk6",
    "a",
    "b",
    "c",
    "d",
    "a6",
    "b6",
    "c6",
    "d6",
    "b1",
    "b2",
    "std-v1",
    "std-v2",
    "symmetric",
    "dahlby1",
    "dahlby2",
];

/// A ready-to-run method together with the (0-based) Kepler integrals it preserves.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: String,
    pub integrator: Integrator<f64>,
    pub integrals: Vec<usize>,
}

/// Default preserved integrals, 0-based.
pub fn default_integrals(name: &str) -> Vec<usize> {
    match name {
        "b1" | "b2" | "symmetric" | "dahlby1" | "dahlby2" => vec![0, 1],
        _ => vec![0, 1, 2],
    }
}

/// Parses a 1-based list such as `"1,2,3"` into 0-based indices.
pub fn parse_integrals(list: &str) -> Result<Vec<usize>, HarnessError> {
    let mut out = Vec::new();
    for part in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let k: usize = part
            .parse()
            .map_err(|_| HarnessError::Config(format!("bad integral index {part:?}")))?;
        if !(1..=4).contains(&k) || out.contains(&(k - 1)) {
            return Err(HarnessError::Config(format!(
                "integral index {k} out of range or repeated"
            )));
        }
        out.push(k - 1);
    }
    if out.is_empty() {
        return Err(HarnessError::Config("empty integral list".into()));
    }
    Ok(out)
}

fn lettered(underlying: Underlying<f64>, letter: char, m: usize) -> ProjectionSpec<f64> {
    let rule = match letter {
        'a' => DirectionRule::AtNew,
        'b' => DirectionRule::AtOld,
        'c' => DirectionRule::AtPredictor,
        _ => DirectionRule::Midpoint,
    };
    ProjectionSpec::new(underlying, vec![rule; m])
}

/// Builds the named preset; `integrals` overrides the default subset.
pub fn preset(name: &str, integrals: Option<Vec<usize>>) -> Result<Preset, HarnessError> {
    let integrals = integrals.unwrap_or_else(|| default_integrals(name));
    let m = integrals.len();
    let dg = DiscreteGradientKind::GonzalezMidpoint;
    let integrator = match name {
        "rk4" => Integrator::plain(Underlying::rk4()),
        "rk6" => Integrator::plain(Underlying::rk6()),
        "a" | "b" | "c" | "d" => {
            Integrator::Projection(lettered(Underlying::rk4(), name.chars().next().unwrap_or('b'), m))
        }
        "a6" | "b6" | "c6" | "d6" => {
            Integrator::Projection(lettered(Underlying::rk6(), name.chars().next().unwrap_or('b'), m))
        }
        "b1" | "b2" => {
            let kind = if name == "b1" {
                DiscreteGradientKind::ItohAbe
            } else {
                DiscreteGradientKind::ItohAbeSymmetrized
            };
            Integrator::DiscreteGradient(DgSpec::new(
                Underlying::rk4(),
                vec![DirectionRule::AtOld; m],
                vec![kind; m],
            )?)
        }
        "std-v1" => Integrator::Projection(make_standard_projection(Underlying::rk4(), StandardVersion::V1AtNew, m)),
        "std-v2" => Integrator::Projection(make_standard_projection(
            Underlying::rk4(),
            StandardVersion::V2AtPredictor,
            m,
        )),
        "symmetric" => Integrator::Projection(make_symmetric_projection(Underlying::implicit_midpoint(), m)?),
        "dahlby1" => Integrator::Projection(make_dahlby(
            DahlbyVariant::PredictorDifference,
            Underlying::rk4(),
            dg,
            m,
        )),
        "dahlby2" => Integrator::Projection(make_dahlby(
            DahlbyVariant::ProjectedRhs,
            Underlying::implicit_midpoint(),
            dg,
            m,
        )),
        other => return Err(HarnessError::UnknownMethod(other.to_string())),
    };
    Ok(Preset {
        name: name.to_string(),
        integrator,
        integrals,
    })
}
