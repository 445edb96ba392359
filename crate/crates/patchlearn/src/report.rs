//! Experiment reports and their JSON and CSV encodings.
//!
//! The CSV form is one record per line, tagged by its first field:
//!
//! ```text
//! meta,<key>,<value>          experiment, seed, best_l
//! config,<key>,<json value>   every resolved setting
//! note,<text>
//! pl,<L>,<train_rmse>,<test_rmse>,<ape>,<loss>,<wall_time_ms>,<global_kept_initial>,<patches json>
//! baseline,<method>,<members>,<rmse>,<ape>
//! ```
//!
//! An empty `test_rmse` means the experiment has no test split. Floats are
//! written in shortest round-trip form in both encodings.

use std::io::{Read, Write};

use patchlearn_core::patch::loss;
use patchlearn_core::PatchBox;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub alpha: f64,
    pub l_max: usize,
    pub mfs_per_input: usize,
    pub ridge_lambda: f64,
    pub premise_epochs: usize,
    pub premise_step: f64,
    pub min_patch_examples: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Evaluation set of the `ape` and baseline columns: `"train"` or `"test"`.
    pub evaluated_on: String,
    pub bagging_resampling: String,
    pub lsboost_shrinkage: f64,
    pub tree_max_depth: usize,
    pub tree_min_leaf: usize,
    /// Steps between retrains in the online protocol; 0 when not online.
    pub retrain_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlRow {
    /// Number of patches in the model.
    pub l: usize,
    pub train_rmse: f64,
    pub test_rmse: Option<f64>,
    pub ape: f64,
    pub loss: f64,
    pub wall_time_ms: f64,
    /// The global model could not be refit and the initial one was kept.
    pub global_kept_initial: bool,
    pub patches: Vec<PatchBox>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub method: String,
    pub members: usize,
    pub rmse: f64,
    pub ape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// `"1"`..`"5"`, or `"custom"` for user data.
    pub experiment: String,
    pub seed: u64,
    pub best_l: usize,
    pub config: ConfigEcho,
    pub rows: Vec<PlRow>,
    pub baselines: Vec<BaselineRow>,
    /// Partial results, fallbacks and protocol choices worth knowing about.
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl ExperimentReport {
    /// Rows whose loss is not `loss(train_rmse, l, alpha)` bit-for-bit.
    pub fn loss_mismatches(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| loss(r.train_rmse, r.l, self.config.alpha).to_bits() != r.loss.to_bits())
            .map(|r| r.l)
            .collect()
    }

    pub fn row(&self, l: usize) -> Option<&PlRow> {
        self.rows.iter().find(|r| r.l == l)
    }

    pub fn baseline(&self, method: &str, members: usize) -> Option<&BaselineRow> {
        self.baselines.iter().find(|b| b.method == method && b.members == members)
    }

    /// The same report with wall times zeroed, for determinism checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.wall_time_ms = 0.0;
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| HarnessError::Parse { path: e.path().to_string(), message: e.inner().to_string() })
    }

    pub fn write(&self, format: Format, out: impl Write) -> Result<()> {
        match format {
            Format::Json => {
                let mut out = out;
                writeln!(out, "{}", self.to_json()).map_err(|e| HarnessError::io("<report output>", e))
            }
            Format::Csv => self.write_csv(out),
        }
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(["meta", "experiment", &self.experiment])?;
        w.write_record(["meta", "seed", &self.seed.to_string()])?;
        w.write_record(["meta", "best_l", &self.best_l.to_string()])?;
        let config = serde_json::to_value(&self.config).expect("config serializes");
        for (key, value) in config.as_object().expect("config is a struct") {
            w.write_record(["config", key, &value.to_string()])?;
        }
        for note in &self.notes {
            w.write_record(["note", note])?;
        }
        for r in &self.rows {
            w.write_record([
                "pl".to_string(),
                r.l.to_string(),
                r.train_rmse.to_string(),
                r.test_rmse.map(|v| v.to_string()).unwrap_or_default(),
                r.ape.to_string(),
                r.loss.to_string(),
                r.wall_time_ms.to_string(),
                r.global_kept_initial.to_string(),
                serde_json::to_string(&r.patches).expect("boxes serialize"),
            ])?;
        }
        for b in &self.baselines {
            w.write_record([
                "baseline".to_string(),
                b.method.clone(),
                b.members.to_string(),
                b.rmse.to_string(),
                b.ape.to_string(),
            ])?;
        }
        w.flush().map_err(|e| HarnessError::io("<report output>", e))?;
        Ok(())
    }

    pub fn from_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
        let mut experiment = None;
        let mut seed = None;
        let mut best_l = None;
        let mut config = serde_json::Map::new();
        let mut notes = Vec::new();
        let mut rows = Vec::new();
        let mut baselines = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |message: String| HarnessError::CsvContent { line, message };
            let field = |i: usize| rec.get(i).ok_or_else(|| bad(format!("missing field {i}")));
            match field(0)? {
                "meta" => {
                    let value = field(2)?;
                    match field(1)? {
                        "experiment" => experiment = Some(value.to_string()),
                        "seed" => seed = Some(parse_num::<u64>(value, line)?),
                        "best_l" => best_l = Some(parse_num::<usize>(value, line)?),
                        other => return Err(bad(format!("unknown meta key `{other}`"))),
                    }
                }
                "config" => {
                    let value: serde_json::Value =
                        serde_json::from_str(field(2)?).map_err(|e| bad(format!("config value: {e}")))?;
                    config.insert(field(1)?.to_string(), value);
                }
                "note" => notes.push(field(1)?.to_string()),
                "pl" => {
                    let test = field(3)?;
                    rows.push(PlRow {
                        l: parse_num(field(1)?, line)?,
                        train_rmse: parse_num(field(2)?, line)?,
                        test_rmse: if test.is_empty() { None } else { Some(parse_num(test, line)?) },
                        ape: parse_num(field(4)?, line)?,
                        loss: parse_num(field(5)?, line)?,
                        wall_time_ms: parse_num(field(6)?, line)?,
                        global_kept_initial: parse_num(field(7)?, line)?,
                        patches: serde_json::from_str(field(8)?).map_err(|e| bad(format!("patches: {e}")))?,
                    });
                }
                "baseline" => baselines.push(BaselineRow {
                    method: field(1)?.to_string(),
                    members: parse_num(field(2)?, line)?,
                    rmse: parse_num(field(3)?, line)?,
                    ape: parse_num(field(4)?, line)?,
                }),
                other => return Err(bad(format!("unknown record type `{other}`"))),
            }
        }
        let missing = |what: &str| HarnessError::CsvContent { line: 0, message: format!("no `{what}` record") };
        let config = serde_path_to_error::deserialize(serde_json::Value::Object(config)).map_err(|e| {
            HarnessError::Parse { path: format!("config.{}", e.path()), message: e.inner().to_string() }
        })?;
        Ok(Self {
            experiment: experiment.ok_or_else(|| missing("experiment"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            best_l: best_l.ok_or_else(|| missing("best_l"))?,
            config,
            rows,
            baselines,
            notes,
        })
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: u64) -> Result<T> {
    s.trim().parse().map_err(|_| HarnessError::CsvContent { line, message: format!("cannot parse `{s}`") })
}
