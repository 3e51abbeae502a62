//! JSON model documents: group, action and parameters in one file, plus the
//! matrix export format (nested arrays of `[re, im]` pairs, row-major).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupAction, Subgroup};
use crate::linalg::{c, CMat};
use crate::parametric::{
    induced_group, is_consistent, is_frame, is_permissible, maximal_permissible_subgroup,
    ParametricFunction,
};
use crate::space::{StateSpace, StateSpaceSelector};

/// Selector stanza of the model document.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct StateSpaceSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

/// A model document: everything needed to reconstruct the group, its action
/// and the parametric functions.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub elements: Vec<String>,
    pub cayley: Vec<Vec<usize>>,
    pub points: Vec<String>,
    pub action: Vec<Vec<usize>>,
    pub parameters: BTreeMap<String, Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encodings: Option<BTreeMap<String, BTreeMap<String, f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_space: Option<StateSpaceSpec>,
    /// Reference vector of the coherent family in state-space coordinates,
    /// as `[re, im]` pairs; defaults to the projected delta function at the
    /// base point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_vector: Option<Vec<(f64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<ModelDocument> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.schema_version != 1 {
            return Err(Error::Schema {
                field: "schema_version".into(),
                reason: format!("unsupported version {}", doc.schema_version),
            });
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<ModelDocument> {
        let text = std::fs::read_to_string(path)?;
        ModelDocument::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes") + "\n"
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Builds the validated group action.
    pub fn build_action(&self) -> Result<GroupAction> {
        let group = Arc::new(FiniteGroup::from_cayley(
            self.cayley.clone(),
            Some(self.elements.clone()),
        )?);
        GroupAction::new(group, self.action.clone(), Some(self.points.clone()))
    }

    /// Builds the parametric functions, validating label-list lengths.
    pub fn build_parameters(&self) -> Result<BTreeMap<String, ParametricFunction>> {
        let m = self.points.len();
        let mut out = BTreeMap::new();
        for (name, labels) in &self.parameters {
            if labels.len() != m {
                return Err(Error::Schema {
                    field: format!("parameters.{name}"),
                    reason: format!("{} labels for {m} points", labels.len()),
                });
            }
            out.insert(
                name.clone(),
                ParametricFunction::new(name.clone(), labels.clone()),
            );
        }
        Ok(out)
    }

    /// Numeric encoding for one parameter (explicit overrides or defaults).
    pub fn encoding_for(&self, theta: &ParametricFunction) -> Vec<(String, f64)> {
        let overrides = self.encodings.as_ref().and_then(|e| e.get(&theta.name));
        theta.numeric_encoding(overrides)
    }

    /// Builds the analysis state space per the document's selector.
    pub fn build_state_space(&self) -> Result<StateSpace> {
        let action = self.build_action()?;
        let seed = self.seed.unwrap_or(crate::repr::DEFAULT_DECOMPOSE_SEED);
        let selector = match &self.state_space {
            Some(StateSpaceSpec { index: Some(i), .. }) => StateSpaceSelector::Index(*i),
            Some(StateSpaceSpec { dim: Some(d), .. }) => StateSpaceSelector::FirstOfDim(*d),
            _ => StateSpaceSelector::LargestDim,
        };
        match &self.reference_vector {
            Some(pairs) => {
                let f0 = crate::linalg::CVec::from_iterator(
                    pairs.len(),
                    pairs.iter().map(|&(re, im)| c(re, im)),
                );
                StateSpace::with_reference_vector(action, seed, selector, 0, &f0)
            }
            None => StateSpace::build(action, seed, selector, 0),
        }
    }

    /// The bundled triangle system as a document.
    pub fn s3_triangle() -> ModelDocument {
        let action = crate::triangle::triangle_action();
        let group = action.group();
        let parameters = crate::triangle::triangle_parameters()
            .into_iter()
            .map(|(k, v)| (k, v.labels))
            .collect();
        let encodings = crate::triangle::triangle_encodings()
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect();
        let clean = |x: f64| if x.abs() < 1e-14 { 0.0 } else { x };
        let reference_vector = crate::triangle::triangle_state_space().ok().map(|space| {
            let f0 = &space.family.vectors[space.family.base_point];
            f0.iter().map(|z| (clean(z.re), clean(z.im))).collect()
        });
        ModelDocument {
            schema_version: 1,
            elements: group.names().to_vec(),
            cayley: group.cayley().to_vec(),
            points: action.point_names().to_vec(),
            action: action.table().to_vec(),
            parameters,
            encodings: Some(encodings),
            state_space: Some(StateSpaceSpec {
                dim: Some(2),
                index: None,
            }),
            reference_vector,
            seed: None,
        }
    }
}

/// Per-parameter analysis results.
#[derive(Debug, Clone, Serialize)]
pub struct ParameterAnalysis {
    pub name: String,
    pub permissible: bool,
    /// Counterexamples `(φ₁, φ₂, g, θ(gφ₁), θ(gφ₂))` by display name.
    pub witnesses: Vec<(String, String, String, String, String)>,
    pub maximal_subgroup: Vec<String>,
    pub induced_group_order: usize,
    /// Dimension of the parametric invariant subspace = number of values.
    pub invariant_subspace_dim: usize,
}

/// Full analysis report of a model document.
#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub group_order: usize,
    pub point_count: usize,
    pub parameters: Vec<ParameterAnalysis>,
    pub frame: bool,
    pub consistent: bool,
}

/// Runs the permissibility analysis of every parameter in the document.
pub fn analyze(doc: &ModelDocument) -> Result<AnalyzeReport> {
    let action = doc.build_action()?;
    let parameters = doc.build_parameters()?;
    let full = Subgroup::full(action.group().clone());
    let mut out = Vec::new();
    for (name, theta) in &parameters {
        let report = is_permissible(theta, &action, &full);
        let witnesses = report
            .witnesses
            .iter()
            .map(|&(p1, p2, g)| {
                (
                    action.point_name(p1).to_string(),
                    action.point_name(p2).to_string(),
                    action.group().name(g).to_string(),
                    theta.value(action.apply(g, p1)).to_string(),
                    theta.value(action.apply(g, p2)).to_string(),
                )
            })
            .collect();
        let g_a = maximal_permissible_subgroup(theta, &action);
        let induced = induced_group(theta, &action, &g_a)?;
        out.push(ParameterAnalysis {
            name: name.clone(),
            permissible: report.permissible,
            witnesses,
            maximal_subgroup: g_a.member_names(),
            induced_group_order: induced.order(),
            invariant_subspace_dim: theta.values().len(),
        });
    }
    let thetas: Vec<ParametricFunction> = parameters.values().cloned().collect();
    Ok(AnalyzeReport {
        group_order: action.group().order(),
        point_count: action.set_size(),
        parameters: out,
        frame: is_frame(&thetas),
        consistent: is_consistent(&thetas, &action),
    })
}

/// Complex matrix as nested arrays of `[re, im]` pairs, row-major.
pub fn cmat_to_json(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            let row: Vec<Value> = (0..m.ncols())
                .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

/// Inverse of [`cmat_to_json`].
pub fn cmat_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::Schema {
        field: "matrix".into(),
        reason: "expected an array of rows".into(),
    })?;
    let nrows = rows.len();
    let ncols = rows
        .first()
        .and_then(|r| r.as_array())
        .map(|r| r.len())
        .unwrap_or(0);
    let mut out = CMat::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Schema {
            field: format!("matrix[{i}]"),
            reason: "expected an array".into(),
        })?;
        if row.len() != ncols {
            return Err(Error::Schema {
                field: format!("matrix[{i}]"),
                reason: "ragged rows".into(),
            });
        }
        for (j, entry) in row.iter().enumerate() {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Schema {
                    field: format!("matrix[{i}][{j}]"),
                    reason: "expected [re, im]".into(),
                })?;
            let re = pair[0].as_f64().unwrap_or(f64::NAN);
            let im = pair[1].as_f64().unwrap_or(f64::NAN);
            out[(i, j)] = c(re, im);
        }
    }
    Ok(out)
}
