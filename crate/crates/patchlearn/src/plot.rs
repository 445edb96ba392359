//! Tidy `series,x,y` CSV for plotting experiment results.
//!
//! Series:
//! - `target`: evaluation targets against the run's axis
//! - `pl_L<l>` and `error_L<l>`: routed predictions and `y − ŷ` per swept L
//! - `sse`: initial-global SSE per candidate box, `x` = flat index
//! - `train_rmse`, `test_rmse`, `loss`: against L
//! - `bagging_rmse`, `lsboost_rmse`: against the number of members

use std::io::Write;

use patchlearn_core::Regressor;

use crate::error::{HarnessError, Result};
use crate::experiment::ExperimentRun;

pub fn write_plot_csv(run: &ExperimentRun, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "x", "y"])?;
    let mut put = |series: &str, x: f64, y: f64| w.write_record([series, &x.to_string(), &y.to_string()]);

    let eval = run.eval_set();
    for (&x, &y) in run.axis.iter().zip(eval.targets()) {
        put("target", x, y)?;
    }
    for (row, model) in run.report.rows.iter().zip(&run.fits) {
        let fitted = format!("pl_L{}", row.l);
        let error = format!("error_L{}", row.l);
        for ((xi, y), &x) in eval.iter().zip(&run.axis) {
            let p = model.predict(xi);
            put(&fitted, x, p)?;
            put(&error, x, y - p)?;
        }
    }
    for c in &run.candidates {
        put("sse", c.patch_box.flat_index as f64, c.sse)?;
    }
    for row in &run.report.rows {
        let l = row.l as f64;
        put("train_rmse", l, row.train_rmse)?;
        if let Some(t) = row.test_rmse {
            put("test_rmse", l, t)?;
        }
        put("loss", l, row.loss)?;
    }
    for b in &run.report.baselines {
        put(&format!("{}_rmse", b.method), b.members as f64, b.rmse)?;
    }
    w.flush().map_err(|e| HarnessError::io("<plot output>", e))?;
    Ok(())
}
