//! The solid-triangle-in-a-sphere system: a macroscopic model with the
//! symmetric group `S₃` acting on the six triangle positions.
//!
//! Positions are labeled `1=ABC, 2=CAB, 3=BCA, 4=ACB, 5=CBA, 6=BAC`,
//! letters read counter-clockwise from the lower-left corner. Rotations
//! (1-3) show the white face up, reflections (4-6) the black face. Four
//! windows observe the system: three equatorial windows showing the letter
//! at a corner, one top window showing the color.
//!
//! The observable layer runs on statistical states: opening a window
//! samples from the current distribution and collapses to the observed
//! level set, retaining earlier information exactly when the old focus is
//! permissible for the new window's group. The operator layer (spectra,
//! transition tables) runs on a 2-dimensional irreducible state space whose
//! reference vector is placed so that the coherent family splits into three
//! orthogonal pairs; each window's operator is then eigen-aligned on its
//! spectrum.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupAction, Subgroup};
use crate::linalg::{cr, hermitian_eigen, CMat, CVec};
use crate::measurement::{measure, rng_from_seed, MeasurementRecord, State};
use crate::operators::SpectralOperator;
use crate::parametric::{
    is_permissible, maximal_permissible_subgroup, ParametricFunction, PermissibilityReport,
};
use crate::repr::DEFAULT_DECOMPOSE_SEED;
use crate::space::{StateSpace, StateSpaceSelector};
use crate::spectrum::{a_spectrum, SpectrumReport};

/// Slot permutations of the six triangle motions, paper order:
/// identity, two rotations, three reflections.
const MOTIONS: [[usize; 3]; 6] = [
    [0, 1, 2], // g1
    [1, 2, 0], // g2: rotation
    [2, 0, 1], // g3: rotation
    [0, 2, 1], // g4: reflection through corner a
    [2, 1, 0], // g5: reflection through corner b
    [1, 0, 2], // g6: reflection through corner c
];

const LETTERS: [char; 3] = ['A', 'B', 'C'];

fn compose(p: &[usize; 3], q: &[usize; 3]) -> [usize; 3] {
    [p[q[0]], p[q[1]], p[q[2]]]
}

fn invert(p: &[usize; 3]) -> [usize; 3] {
    let mut inv = [0usize; 3];
    for s in 0..3 {
        inv[p[s]] = s;
    }
    inv
}

fn motion_index(p: &[usize; 3]) -> usize {
    MOTIONS
        .iter()
        .position(|m| m == p)
        .expect("closed under composition")
}

/// The `S₃` group in the triangle's element order `g1..g6`.
pub fn triangle_group() -> Arc<FiniteGroup> {
    let cayley = (0..6)
        .map(|i| {
            (0..6)
                .map(|j| motion_index(&compose(&MOTIONS[i], &MOTIONS[j])))
                .collect()
        })
        .collect();
    let names = (1..=6).map(|i| format!("g{i}")).collect();
    Arc::new(FiniteGroup::from_cayley(cayley, Some(names)).expect("S3 Cayley table"))
}

/// Position labels `ABC, CAB, BCA, ACB, CBA, BAC`.
pub fn position_labels() -> Vec<String> {
    MOTIONS
        .iter()
        .map(|m| {
            let inv = invert(m);
            (0..3).map(|s| LETTERS[inv[s]]).collect()
        })
        .collect()
}

/// The regular action of the triangle group on its six positions, with
/// point names `1..6`.
pub fn triangle_action() -> GroupAction {
    let group = triangle_group();
    let table: Vec<Vec<usize>> = group
        .elements()
        .map(|g| group.elements().map(|p| group.mul(g, p)).collect())
        .collect();
    let names = (1..=6).map(|i| format!("{i}")).collect();
    GroupAction::new(group, table, Some(names)).expect("regular action is valid")
}

/// The four parametric functions of the system: color and the three corner
/// letters.
pub fn triangle_parameters() -> BTreeMap<String, ParametricFunction> {
    let labels = position_labels();
    let mut map = BTreeMap::new();
    map.insert(
        "theta0".to_string(),
        ParametricFunction::new(
            "theta0",
            (0..6)
                .map(|i| {
                    if i < 3 {
                        "white".to_string()
                    } else {
                        "black".to_string()
                    }
                })
                .collect(),
        ),
    );
    for (corner, name) in ["theta_a", "theta_b", "theta_c"].iter().enumerate() {
        map.insert(
            name.to_string(),
            ParametricFunction::new(
                *name,
                labels
                    .iter()
                    .map(|l| l.chars().nth(corner).unwrap().to_string())
                    .collect(),
            ),
        );
    }
    map
}

/// Numeric encodings: color as ±1 (white up is +1), letters by sorted index.
pub fn triangle_encodings() -> BTreeMap<String, Vec<(String, f64)>> {
    let mut map = BTreeMap::new();
    map.insert(
        "theta0".to_string(),
        vec![("black".to_string(), -1.0), ("white".to_string(), 1.0)],
    );
    let letters = vec![
        ("A".to_string(), 0.0),
        ("B".to_string(), 1.0),
        ("C".to_string(), 2.0),
    ];
    for name in ["theta_a", "theta_b", "theta_c"] {
        map.insert(name.to_string(), letters.clone());
    }
    map
}

/// Builds the reference vector whose coherent family splits into three
/// orthogonal (antipodal) pairs, so that every window operator is
/// eigen-aligned on a two-point prespectrum.
///
/// The recipe works in the Bloch frame of the 2-dim block: the direction
/// fixed under conjugation by rotations and flipped by reflections is the
/// `y` axis; in the remaining plane the reflection through `g₅` fixes an
/// axis `u`, and the reference vector's Bloch vector is placed
/// perpendicular to `u` with `y` component `1/2`.
/// Builds the triangle's analysis state space: the first 2-dim block of the
/// regular representation with the paired reference vector.
pub fn triangle_state_space() -> Result<StateSpace> {
    let action = triangle_action();
    let base = StateSpace::build(
        action.clone(),
        DEFAULT_DECOMPOSE_SEED,
        StateSpaceSelector::FirstOfDim(2),
        0,
    )?;
    let f0 = paired_reference_vector(&base)?;
    StateSpace::with_reference_vector(
        action,
        DEFAULT_DECOMPOSE_SEED,
        StateSpaceSelector::FirstOfDim(2),
        0,
        &f0,
    )
}

fn paired_reference_vector(space: &StateSpace) -> Result<CVec> {
    let rep = &space.rep_on_m;
    let group = space.action.group();
    let d = rep.dim();
    if d != 2 {
        return Err(Error::DimensionMismatch(format!(
            "paired reference vector needs a 2-dim block, got {d}"
        )));
    }
    let parity = |g: usize| -> f64 {
        // parity of the slot permutation: rotations even, reflections odd
        if MOTIONS[g] == [0, 1, 2] || MOTIONS[g][0] != 0 && MOTIONS[g][1] != 1 && MOTIONS[g][2] != 2
        {
            1.0
        } else {
            -1.0
        }
    };
    // sign-isotypic part of the adjoint action: the σ_y analogue
    let mut sigma_y = CMat::zeros(2, 2);
    for attempt in 0..4u32 {
        let seed = CMat::from_fn(2, 2, |i, j| {
            cr(((1 + attempt as usize) * (3 * i + j + 1)) as f64)
        });
        let seed = (&seed + seed.adjoint()).scale(0.5);
        let seed = &seed - CMat::identity(2, 2).scale(seed.trace().re / 2.0);
        let mut t = CMat::zeros(2, 2);
        for g in group.elements() {
            let u = rep.matrix(g);
            t += (u * &seed * u.adjoint()).scale(parity(g) / 6.0);
        }
        if t.norm() > 1e-6 {
            sigma_y = t.scale((2.0 / (&t * &t).trace().re).sqrt());
            break;
        }
    }
    if sigma_y.norm() < 1e-6 {
        return Err(Error::DimensionMismatch(
            "no sign-isotypic direction in the adjoint action".into(),
        ));
    }
    // a unit direction in the orthogonal traceless plane: the σ_x analogue
    let mut sigma_x = CMat::zeros(2, 2);
    for attempt in 0..4u32 {
        let seed = CMat::from_fn(2, 2, |i, j| {
            cr((2 * i + 3 * j + 1) as f64 / (attempt + 1) as f64)
                + cr(1.0) * crate::linalg::c(0.0, ((i + 2 * j) as f64) * 0.37)
        });
        let seed = (&seed + seed.adjoint()).scale(0.5);
        let seed = &seed - CMat::identity(2, 2).scale(seed.trace().re / 2.0);
        // remove the σ_y component
        let coef = (&sigma_y * &seed).trace().re / 2.0;
        let t = &seed - sigma_y.scale(coef);
        if t.norm() > 1e-6 {
            sigma_x = t.scale((2.0 / (&t * &t).trace().re).sqrt());
            break;
        }
    }
    // Pauli algebra completes the frame
    let sigma_z = (&sigma_x * &sigma_y).scale(1.0) * crate::linalg::c(0.0, -1.0);

    // adjoint action of the reflection g5 (index 4) on the (x, z) plane
    let u5 = rep.matrix(4);
    let conj = |s: &CMat| u5 * s * u5.adjoint();
    let r = [
        [
            (&sigma_x * conj(&sigma_x)).trace().re / 2.0,
            (&sigma_x * conj(&sigma_z)).trace().re / 2.0,
        ],
        [
            (&sigma_z * conj(&sigma_x)).trace().re / 2.0,
            (&sigma_z * conj(&sigma_z)).trace().re / 2.0,
        ],
    ];
    // +1 eigenvector of the 2x2 reflection matrix r
    let axis = {
        let (a, b, c_, d_) = (r[0][0], r[0][1], r[1][0], r[1][1]);
        // (r - I) has rank 1; its kernel is the fixed axis. Use the larger
        // row of (r - I) to read it off.
        let row1 = [a - 1.0, b];
        let row2 = [c_, d_ - 1.0];
        let v = if row1[0].abs() + row1[1].abs() >= row2[0].abs() + row2[1].abs() {
            [-row1[1], row1[0]]
        } else {
            [-row2[1], row2[0]]
        };
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    };
    // Bloch vector perpendicular to the fixed axis in (x, z), tilted out of
    // the plane by y = 1/2
    let y0 = 0.5;
    let rho = (1.0f64 - y0 * y0).sqrt();
    let perp = [-axis[1], axis[0]];
    let h0 = sigma_x.scale(rho * perp[0]) + sigma_z.scale(rho * perp[1]) + sigma_y.scale(y0);
    let (vals, vecs) = hermitian_eigen(&h0);
    let top = vals.len() - 1;
    if (vals[top] - 1.0).abs() > 1e-8 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch construction produced eigenvalue {}",
            vals[top]
        )));
    }
    Ok(vecs.column(top).into_owned())
}

/// Which window of the sphere to open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Window {
    A,
    B,
    C,
    Top,
}

impl Window {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            Window::A => "theta_a",
            Window::B => "theta_b",
            Window::C => "theta_c",
            Window::Top => "theta0",
        }
    }

    pub fn parse(s: &str) -> Option<Window> {
        match s.trim().to_lowercase().as_str() {
            "a" => Some(Window::A),
            "b" => Some(Window::B),
            "c" => Some(Window::C),
            "top" => Some(Window::Top),
            _ => None,
        }
    }
}

/// One line of the experiment transcript.
#[derive(Debug, Clone, Serialize)]
pub struct TranscriptEntry {
    pub step: usize,
    pub window: String,
    pub record: MeasurementRecord,
}

/// Rederivation of the system's permissibility facts.
#[derive(Debug, Clone, Serialize)]
pub struct TriangleVerification {
    pub theta0_permissible: bool,
    pub letter_reports: BTreeMap<String, PermissibilityReport>,
    /// The counterexample for `theta_a`: `θ_a(g₅·1)` and `θ_a(g₅·4)`.
    pub theta_a_counterexample: (String, String),
    pub g_a_members: Vec<String>,
    pub g_a_transitive_on_level: bool,
}

/// The triangle-in-a-sphere experiment.
pub struct TriangleModel {
    pub action: GroupAction,
    pub space: StateSpace,
    pub parameters: BTreeMap<String, ParametricFunction>,
    pub encodings: BTreeMap<String, Vec<(String, f64)>>,
    pub spectral: BTreeMap<String, (SpectrumReport, SpectralOperator)>,
    pub state: State,
    pub history: Vec<TranscriptEntry>,
    pub sealed_top: bool,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl TriangleModel {
    pub fn new(seed: u64, sealed_top: bool) -> Result<Self> {
        let action = triangle_action();
        let space = triangle_state_space()?;
        // the construction must yield three orthogonal pairs
        let mut paired = 0;
        for i in 0..6 {
            for j in i + 1..6 {
                if space.family.vectors[i]
                    .dotc(&space.family.vectors[j])
                    .norm()
                    < 1e-8
                {
                    paired += 1;
                }
            }
        }
        if paired != 3 {
            return Err(Error::DimensionMismatch(format!(
                "expected 3 orthogonal pairs in the coherent family, found {paired}"
            )));
        }
        let parameters = triangle_parameters();
        let encodings = triangle_encodings();
        let mut spectral = BTreeMap::new();
        for (name, theta) in &parameters {
            let enc = &encodings[name];
            spectral.insert(name.clone(), a_spectrum(theta, &space, enc)?);
        }
        Ok(TriangleModel {
            action,
            space,
            parameters,
            encodings,
            spectral,
            state: State::haar(6),
            history: Vec::new(),
            sealed_top,
            seed,
            rng: rng_from_seed(seed),
        })
    }

    pub fn parameter(&self, name: &str) -> Result<&ParametricFunction> {
        self.parameters
            .get(name)
            .ok_or_else(|| Error::UnknownLabel {
                name: name.to_string(),
                label: "parameter".to_string(),
            })
    }

    /// Opens a window: samples an observation in the current state and
    /// applies the collapse rule. With a sealed top, the top window refuses
    /// to open.
    pub fn open_window(&mut self, window: Window) -> Result<MeasurementRecord> {
        if self.sealed_top && window == Window::Top {
            return Err(Error::WindowSealed(
                "the top window is closed and sealed".into(),
            ));
        }
        let theta = self.parameters[window.parameter_name()].clone();
        let (record, new_state) = measure(&self.state, &theta, &self.action, &mut self.rng)?;
        self.state = new_state;
        self.history.push(TranscriptEntry {
            step: self.history.len(),
            window: format!("{window:?}").to_lowercase(),
            record: record.clone(),
        });
        Ok(record)
    }

    /// Back to total ignorance; the generator continues (replay a fresh
    /// model with the same seed for bit-identical transcripts).
    pub fn reset(&mut self) {
        self.state = State::haar(6);
        self.history.clear();
    }

    /// Rederives the permissibility facts of the system: color is
    /// permissible, corner letters are not, with the standard
    /// counterexample `θ_a(g₅·1) = C ≠ B = θ_a(g₅·4)`.
    pub fn verify(&self) -> Result<TriangleVerification> {
        let full = Subgroup::full(self.action.group().clone());
        let theta0 = &self.parameters["theta0"];
        let theta_a = &self.parameters["theta_a"];
        let theta0_permissible = is_permissible(theta0, &self.action, &full).permissible;
        let mut letter_reports = BTreeMap::new();
        for name in ["theta_a", "theta_b", "theta_c"] {
            letter_reports.insert(
                name.to_string(),
                is_permissible(&self.parameters[name], &self.action, &full),
            );
        }
        // g5 is element index 4; positions 1 and 4 are indices 0 and 3
        let g5 = 4;
        let counter = (
            theta_a.value(self.action.apply(g5, 0)).to_string(),
            theta_a.value(self.action.apply(g5, 3)).to_string(),
        );
        let g_a = maximal_permissible_subgroup(theta_a, &self.action);
        let level_a = theta_a.level_set_of_value("A")?;
        let transitive =
            crate::parametric::stabilizer_transitive_on_level(&self.action, &g_a, &level_a);
        Ok(TriangleVerification {
            theta0_permissible,
            letter_reports,
            theta_a_counterexample: counter,
            g_a_members: g_a.member_names(),
            g_a_transitive_on_level: transitive,
        })
    }

    /// Transition table of `param_b` outcomes from the pure state
    /// `(param_a, value_a)`, using the statistical state semantics.
    pub fn transition_table(
        &self,
        param_a: &str,
        value_a: &str,
        param_b: &str,
    ) -> Result<Vec<(String, f64)>> {
        let theta_a = self.parameter(param_a)?;
        let theta_b = self.parameter(param_b)?;
        let state = State::pure(theta_a, value_a)?;
        Ok(state.outcome_distribution(theta_b))
    }
}
