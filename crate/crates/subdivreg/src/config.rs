//! JSON analysis configs: one scheme source (builtin, inline masks, or a
//! matrix fixture), an optional dilation override, analysis knobs, and
//! output paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsr::{JsrOptions, MatrixSet};
use crate::lattice::DilationSpec;
use crate::schemes::{builtin, matrix_fixture, SchemeParams};
use crate::symbol::{Mask, MaskSequence, Tail};

/// One inline mask: coefficients on a shifted integer box. `values` carries
/// a univariate slice, `rows` a bivariate table (row index = first
/// coordinate). Offsets may be negative; the mask is translated into the
/// nonnegative box before analysis, which changes none of the reported
/// quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMask {
    #[serde(default)]
    pub offset: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<f64>>>,
}

/// Inline mask source: a stationary mask or a periodic cycle of masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMasks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<InlineMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<Vec<InlineMask>>,
}

/// A builtin catalogue entry plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSource {
    pub name: String,
    #[serde(default)]
    pub params: SchemeParams,
}

/// Dilation override: isotropic factor or an explicit integer matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DilationConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
}

/// Joint-spectral-radius knobs exposed in configs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsrConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
}

impl JsrConfig {
    pub fn options(&self) -> JsrOptions {
        let mut o = JsrOptions::default();
        if let Some(g) = self.gap {
            o.gap = g;
        }
        if let Some(d) = self.depth {
            o.tree_depth = d;
        }
        if let Some(b) = self.budget {
            o.enumeration_budget = b;
            o.tree_node_budget = b;
        }
        o
    }
}

/// Output paths; both optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

fn default_horizon() -> usize {
    32
}

/// A complete analysis config. Exactly one of `builtin`, `masks`, `fixture`
/// must be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<InlineMasks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilation: Option<DilationConfig>,
    #[serde(default)]
    pub ell: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default)]
    pub jsr: JsrConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Parse a JSON config, reporting the offending line on failure.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let cfg: AnalysisConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let sources =
            self.builtin.is_some() as usize + self.masks.is_some() as usize + self.fixture.is_some() as usize;
        if sources != 1 {
            return Err(Error::Config(format!(
                "exactly one scheme source (builtin | masks | fixture) must be set, found {sources}"
            )));
        }
        if let Some(d) = &self.dilation {
            if d.m.is_some() == d.matrix.is_some() {
                return Err(Error::Config(
                    "dilation takes exactly one of `m` or `matrix`".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What a config resolves to: a mask sequence to analyze or a bare matrix
/// family for radius computations.
#[derive(Debug, Clone)]
pub enum RunKind {
    Scheme {
        sequence: MaskSequence,
        dilation: DilationSpec,
    },
    Fixture {
        set: MatrixSet,
    },
}

#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub name: String,
    pub kind: RunKind,
}

fn inline_to_mask(im: &InlineMask) -> Result<Mask> {
    match (&im.values, &im.rows) {
        (Some(v), None) => {
            let off = *im.offset.first().unwrap_or(&0);
            let shift = off.min(0).abs();
            Mask::new(
                1,
                v.iter()
                    .enumerate()
                    .map(|(i, &c)| (vec![off + shift + i as i64], c)),
            )
        }
        (None, Some(rows)) => {
            let off0 = *im.offset.first().unwrap_or(&0);
            let off1 = *im.offset.get(1).unwrap_or(&0);
            let (s0, s1) = (off0.min(0).abs(), off1.min(0).abs());
            let mut entries = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    entries.push((vec![off0 + s0 + i as i64, off1 + s1 + j as i64], c));
                }
            }
            Mask::new(2, entries)
        }
        _ => Err(Error::Config(
            "an inline mask takes exactly one of `values` (1-D) or `rows` (2-D)".into(),
        )),
    }
}

fn dilation_for(cfg: &Option<DilationConfig>, dim: usize) -> Result<Option<DilationSpec>> {
    let Some(d) = cfg else { return Ok(None) };
    let spec = match (&d.m, &d.matrix) {
        (Some(m), None) => DilationSpec::isotropic(dim, *m)?,
        (None, Some(rows)) => DilationSpec::general(rows.clone())?,
        _ => unreachable!("validated"),
    };
    if spec.dim() != dim {
        return Err(Error::Config(format!(
            "dilation is {}-dimensional but the scheme is {dim}-dimensional",
            spec.dim()
        )));
    }
    Ok(Some(spec))
}

/// Resolve a validated config into the thing to run.
pub fn resolve(cfg: &AnalysisConfig) -> Result<ResolvedConfig> {
    cfg.validate()?;
    if let Some(b) = &cfg.builtin {
        let desc = builtin(&b.name, &b.params)?;
        let dilation = dilation_for(&cfg.dilation, desc.dimension)?.unwrap_or(desc.dilation);
        return Ok(ResolvedConfig {
            name: desc.name,
            kind: RunKind::Scheme {
                sequence: desc.sequence,
                dilation,
            },
        });
    }
    if let Some(im) = &cfg.masks {
        let (sequence, label) = match (&im.stationary, &im.periodic) {
            (Some(one), None) => {
                let mask = inline_to_mask(one)?;
                (MaskSequence::stationary(mask)?, "inline-stationary")
            }
            (None, Some(cycle)) if !cycle.is_empty() => {
                let masks: Vec<Mask> = cycle.iter().map(inline_to_mask).collect::<Result<_>>()?;
                let seq =
                    MaskSequence::new(Vec::new(), Tail::Periodic(masks.clone()), masks)?;
                (seq, "inline-periodic")
            }
            _ => {
                return Err(Error::Config(
                    "inline masks take exactly one of `stationary` or a nonempty `periodic`".into(),
                ))
            }
        };
        let dim = sequence.dim();
        let dilation = dilation_for(&cfg.dilation, dim)?
            .unwrap_or(DilationSpec::isotropic(dim, 2)?);
        return Ok(ResolvedConfig {
            name: label.to_string(),
            kind: RunKind::Scheme { sequence, dilation },
        });
    }
    let name = cfg.fixture.as_deref().expect("validated");
    Ok(ResolvedConfig {
        name: name.to_string(),
        kind: RunKind::Fixture {
            set: matrix_fixture(name)?,
        },
    })
}

/// The published config schema, kept next to the parser it describes.
pub const CONFIG_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "subdivreg analysis config",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "builtin": {
      "type": "object",
      "additionalProperties": false,
      "required": ["name"],
      "properties": {
        "name": {"type": "string"},
        "params": {
          "type": "object",
          "additionalProperties": false,
          "properties": {
            "n": {"type": "integer", "minimum": 1},
            "lambda_re": {"type": "number"},
            "lambda_im": {"type": "number"},
            "base": {"type": "string"},
            "other": {"type": "string"},
            "member": {"type": "string"}
          }
        }
      }
    },
    "masks": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "stationary": {"$ref": "#/$defs/mask"},
        "periodic": {"type": "array", "items": {"$ref": "#/$defs/mask"}, "minItems": 1}
      }
    },
    "fixture": {"type": "string"},
    "dilation": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "m": {"type": "integer", "minimum": 2},
        "matrix": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}}
      }
    },
    "ell": {"type": "integer", "minimum": 0},
    "horizon": {"type": "integer", "minimum": 4},
    "jsr": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "gap": {"type": "number", "exclusiveMinimum": 0},
        "depth": {"type": "integer", "minimum": 1},
        "budget": {"type": "integer", "minimum": 1}
      }
    },
    "output": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "csv": {"type": "string"},
        "json": {"type": "string"}
      }
    }
  },
  "$defs": {
    "mask": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "offset": {"type": "array", "items": {"type": "integer"}},
        "values": {"type": "array", "items": {"type": "number"}},
        "rows": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}}
      }
    }
  }
}"##;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_config_resolves_with_its_own_dilation() {
        let cfg = parse_config(r#"{"builtin": {"name": "chaikin"}, "ell": 1}"#).unwrap();
        assert_eq!(cfg.ell, 1);
        assert_eq!(cfg.horizon, 32);
        let r = resolve(&cfg).unwrap();
        assert_eq!(r.name, "chaikin");
        match r.kind {
            RunKind::Scheme { dilation, .. } => assert_eq!(dilation.isotropic_m(), Some(2)),
            _ => panic!("expected a scheme"),
        }
    }

    #[test]
    fn exactly_one_source_is_enforced() {
        let none = parse_config(r#"{"ell": 0}"#);
        assert!(matches!(none, Err(Error::Config(_))));
        let both = parse_config(
            r#"{"builtin": {"name": "chaikin"}, "fixture": "example4"}"#,
        );
        assert!(matches!(both, Err(Error::Config(_))));
    }

    #[test]
    fn inline_mask_offsets_are_shifted_into_the_box() {
        let cfg = parse_config(
            r#"{"masks": {"stationary": {"offset": [-1], "values": [0.5, 1.0, 0.5]}}}"#,
        )
        .unwrap();
        let r = resolve(&cfg).unwrap();
        match r.kind {
            RunKind::Scheme { sequence, .. } => {
                let m = sequence.level(1);
                assert_eq!(m.coefficient(&[0]), 0.5);
                assert_eq!(m.coefficient(&[1]), 1.0);
                assert_eq!(m.coefficient(&[2]), 0.5);
            }
            _ => panic!("expected a scheme"),
        }
    }

    #[test]
    fn bivariate_inline_masks_parse_rows() {
        let cfg = parse_config(
            r#"{"masks": {"stationary": {"offset": [0, 0], "rows": [[0.25, 0.5], [0.5, 1.0]]}},
                "dilation": {"m": 2}}"#,
        )
        .unwrap();
        let r = resolve(&cfg).unwrap();
        match r.kind {
            RunKind::Scheme { sequence, dilation } => {
                assert_eq!(sequence.dim(), 2);
                assert_eq!(dilation.dim(), 2);
                assert_eq!(sequence.level(1).coefficient(&[1, 1]), 1.0);
            }
            _ => panic!("expected a scheme"),
        }
    }

    #[test]
    fn fixtures_resolve_to_matrix_sets() {
        let cfg = parse_config(r#"{"fixture": "example4"}"#).unwrap();
        let r = resolve(&cfg).unwrap();
        match r.kind {
            RunKind::Fixture { set } => assert_eq!(set.len(), 6),
            _ => panic!("expected a fixture"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "{\n  \"builtin\": {\"name\": \"chaikin\"},\n  \"ell\": oops\n}";
        match parse_config(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse_config(r#"{"builtin": {"name": "chaikin"}, "elll": 1}"#).is_err());
    }

    #[test]
    fn jsr_knobs_map_onto_engine_options() {
        let cfg = parse_config(
            r#"{"fixture": "example4", "jsr": {"gap": 1e-6, "depth": 9, "budget": 1234}}"#,
        )
        .unwrap();
        let o = cfg.jsr.options();
        assert_eq!(o.gap, 1e-6);
        assert_eq!(o.tree_depth, 9);
        assert_eq!(o.enumeration_budget, 1234);
        assert_eq!(o.tree_node_budget, 1234);
    }

    #[test]
    fn the_schema_document_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(CONFIG_SCHEMA).unwrap();
        assert!(v.get("properties").is_some());
    }

    #[test]
    fn configs_round_trip_through_json() {
        let cfg = parse_config(
            r#"{"builtin": {"name": "daubechies", "params": {"n": 4}},
                "ell": 1, "horizon": 24,
                "jsr": {"gap": 1e-8},
                "output": {"csv": "out.csv"}}"#,
        )
        .unwrap();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
    }
}
