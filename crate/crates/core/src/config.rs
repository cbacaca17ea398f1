//! Configuration schema for the command-line tool and JSON forms of the
//! engine's outputs. All exact values travel as strings.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::amplitude::LegTensor;
use crate::error::{Error, Result};
use crate::model::{
    rect_indices, validate_interaction, FieldSpace, GradedFunctional, KernelMode, KernelModel,
    SymFunctional,
};
use crate::renorm::{BphzTable, EqualityReport, IndexedCounterterms};
use crate::scale::{Rat, ScaleContext, ScaleFunction};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Field-space dimension, at least 1.
    pub dim: usize,
    /// Scale symbols, e.g. ["eps", "L"].
    pub symbols: Vec<String>,
    /// The regulator symbol; must appear in `symbols`.
    pub regulator: String,
    /// The length-scale symbol; must appear in `symbols`.
    pub length: String,
    pub kernel: KernelConfig,
    /// Interaction components; coefficients are rational strings "p/q".
    pub interaction: Vec<InteractionEntry>,
    pub gmax: u32,
    pub dmax: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelConfig {
    pub modes: Vec<ModeConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeConfig {
    /// Spectral direction, one rational string per field dimension.
    pub vector: Vec<String>,
    /// Kernel contribution sum of coeff * t^{-power}.
    pub profile: Vec<ProfileTerm>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub coeff: String,
    pub power: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionEntry {
    pub i: u32,
    pub j: u32,
    pub terms: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub multi_index: Vec<u32>,
    pub coeff: String,
}

/// Everything the engine needs, built from a parsed configuration.
pub struct ModelSetup {
    pub ctx: Arc<ScaleContext>,
    pub model: KernelModel,
    pub interaction: GradedFunctional,
    pub indices: BTreeSet<(u32, u32)>,
    /// Symbol index of the regulator (always the context regulator).
    pub regulator: usize,
    /// Symbol index of the length scale.
    pub length: usize,
}

fn parse_rat(s: &str) -> Result<Rat> {
    Rat::from_str(s).map_err(|e| Error::Config(format!("bad rational `{s}`: {e}")))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    pub fn build(&self) -> Result<ModelSetup> {
        let names: Vec<&str> = self.symbols.iter().map(|s| s.as_str()).collect();
        let regulator = self
            .symbols
            .iter()
            .position(|s| *s == self.regulator)
            .ok_or_else(|| Error::Config(format!("regulator `{}` not in symbols", self.regulator)))?;
        let length = self
            .symbols
            .iter()
            .position(|s| *s == self.length)
            .ok_or_else(|| Error::Config(format!("length `{}` not in symbols", self.length)))?;
        if length == regulator {
            return Err(Error::Config("length symbol equals the regulator".into()));
        }
        let ctx = ScaleContext::new(&names, regulator)?;
        let space = FieldSpace::new(self.dim)?;
        let mut modes = Vec::new();
        for m in &self.kernel.modes {
            if m.vector.len() != self.dim {
                return Err(Error::Config("mode vector length must equal dim".into()));
            }
            let vector = m.vector.iter().map(|s| parse_rat(s)).collect::<Result<Vec<_>>>()?;
            let profile = m
                .profile
                .iter()
                .map(|t| Ok((parse_rat(&t.coeff)?, parse_rat(&t.power)?)))
                .collect::<Result<Vec<_>>>()?;
            modes.push(KernelMode { vector, profile });
        }
        let model = KernelModel { space, modes };
        model.validate()?;
        let indices = rect_indices(self.gmax, self.dmax);
        let mut interaction = GradedFunctional::new(Arc::clone(&ctx), self.dim, indices.clone());
        for entry in &self.interaction {
            let mut part = SymFunctional::zero(self.dim, entry.j);
            for t in &entry.terms {
                if t.multi_index.len() != self.dim
                    || t.multi_index.iter().sum::<u32>() != entry.j
                {
                    return Err(Error::Config(format!(
                        "multi-index {:?} does not fit degree {}",
                        t.multi_index, entry.j
                    )));
                }
                part.insert(
                    t.multi_index.clone(),
                    ScaleFunction::constant(&ctx, parse_rat(&t.coeff)?),
                )?;
            }
            interaction.set_component(entry.i, entry.j, part).map_err(|_| {
                Error::Config(format!("interaction index ({},{}) out of range", entry.i, entry.j))
            })?;
        }
        validate_interaction(&interaction)?;
        Ok(ModelSetup { ctx, model, interaction, indices, regulator, length })
    }
}

fn sym_to_json(part: &SymFunctional) -> serde_json::Value {
    let terms: Vec<_> = part
        .terms()
        .map(|(alpha, v)| json!({ "multi_index": alpha, "value": v.to_records() }))
        .collect();
    json!(terms)
}

pub fn graded_to_json(g: &GradedFunctional) -> serde_json::Value {
    let comps: Vec<_> = g
        .components()
        .map(|(&(i, j), part)| json!({ "i": i, "j": j, "terms": sym_to_json(part) }))
        .collect();
    json!({ "components": comps })
}

pub fn indexed_counterterms_to_json(ct: &IndexedCounterterms) -> serde_json::Value {
    let entries: Vec<_> = ct
        .terms()
        .map(|(&(i, j), part)| json!({ "i": i, "j": j, "terms": sym_to_json(part) }))
        .collect();
    json!({ "counterterms": entries })
}

fn tensor_to_json(t: &LegTensor) -> serde_json::Value {
    let entries: Vec<_> = t
        .terms()
        .map(|(legs, v)| json!({ "legs": legs, "value": v.to_records() }))
        .collect();
    json!(entries)
}

pub fn bphz_table_to_json(table: &BphzTable) -> serde_json::Value {
    let mut entries: Vec<_> = table.entries().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let rows: Vec<_> = entries
        .into_iter()
        .map(|(graph, t)| json!({ "graph": graph, "tensor": tensor_to_json(t) }))
        .collect();
    json!({ "counterterms": rows })
}

pub fn equality_report_to_json(report: &EqualityReport) -> serde_json::Value {
    let row = |name: &str, c: &crate::renorm::IndexCheck| {
        json!({
            "name": name,
            "index": { "i": c.index.0, "j": c.index.1 },
            "status": if c.pass { "pass" } else { "fail" },
            "difference": sym_to_json(&c.difference),
        })
    };
    let checks: Vec<_> = report
        .counterterm_checks
        .iter()
        .map(|c| row("counterterm-aggregate", c))
        .chain(report.intermediate_checks.iter().map(|c| row("subtracted-flow", c)))
        .collect();
    json!({ "pass": report.all_pass(), "checks": checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const EXAMPLE: &str = r#"{
      "dim": 1,
      "symbols": ["eps", "L"],
      "regulator": "eps",
      "length": "L",
      "kernel": { "modes": [
        { "vector": ["1"], "profile": [ { "coeff": "1", "power": "1" } ] },
        { "vector": ["1"], "profile": [ { "coeff": "1", "power": "2" } ] }
      ] },
      "interaction": [
        { "i": 0, "j": 3, "terms": [ { "multi_index": [3], "coeff": "1/6" } ] },
        { "i": 0, "j": 4, "terms": [ { "multi_index": [4], "coeff": "1/24" } ] }
      ],
      "gmax": 2,
      "dmax": 4
    }"#;

    #[test]
    fn example_config_builds() {
        let cfg = RunConfig::from_json(EXAMPLE).unwrap();
        let setup = cfg.build().unwrap();
        assert_eq!(setup.ctx.symbols(), &["eps".to_string(), "L".to_string()]);
        assert_eq!(setup.model.modes.len(), 2);
        assert!(!setup.interaction.component(0, 3).is_zero());
        assert!(setup.indices.contains(&(2, 4)));
    }

    #[test]
    fn forbidden_interaction_entry_is_a_config_error() {
        let cfg = RunConfig::from_json(
            &EXAMPLE.replace(r#""i": 0, "j": 3"#, r#""i": 0, "j": 2"#)
                .replace(r#""multi_index": [3]"#, r#""multi_index": [2]"#),
        )
        .unwrap();
        assert!(cfg.build().is_err());
    }

    #[test]
    fn graded_json_round_trips_values() {
        let cfg = RunConfig::from_json(EXAMPLE).unwrap();
        let setup = cfg.build().unwrap();
        let v = graded_to_json(&setup.interaction);
        let text = serde_json::to_string(&v).unwrap();
        assert!(text.contains("1/6"));
    }
}
