//! Per-sensor result tables: one row per (machine, signal, sensor), sound rows
//! pooled across sensor locations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::manifest::{Machine, SignalKind};
use crate::error::{Error, Result};
use crate::eval::metrics::{compute_metrics, ConfusionCounts, Metrics};
use crate::signal::{Label, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub machine: Machine,
    pub signal: SignalKind,
    /// Accelerometer id; `None` for sound.
    pub sensor: Option<u8>,
}

impl GroupKey {
    pub fn of(segment: &Segment) -> Self {
        let e = &segment.meta.source;
        Self {
            machine: e.machine,
            signal: e.signal,
            sensor: match e.signal {
                SignalKind::Sound => None,
                SignalKind::Vibration => Some(e.sensor_id),
            },
        }
    }

    /// Row title in the style "Vibration @ Sensor #1" / "Sound @ Sensors 1-5".
    pub fn title(&self) -> String {
        match self.sensor {
            None => format!("Sound @ Sensors 1-{}", self.machine.sensors()),
            Some(s) => format!("Vibration @ Sensor #{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub group: GroupKey,
    pub counts: ConfusionCounts,
    pub metrics: Metrics,
}

/// One report per group present in `segments`, in (machine, sound first, sensor) order.
pub fn report_by_group(segments: &[Segment], predictions: &[Label]) -> Result<Vec<MetricsReport>> {
    if segments.len() != predictions.len() {
        return Err(Error::Shape(format!(
            "{} segments vs {} predictions",
            segments.len(),
            predictions.len()
        )));
    }
    let mut groups: BTreeMap<GroupKey, ConfusionCounts> = BTreeMap::new();
    for (s, &p) in segments.iter().zip(predictions) {
        groups
            .entry(GroupKey::of(s))
            .or_default()
            .record(p, s.label);
    }
    groups
        .into_iter()
        .map(|(group, counts)| {
            Ok(MetricsReport {
                group,
                counts,
                metrics: compute_metrics(&counts)?,
            })
        })
        .collect()
}

/// Sum of the counts of all reports.
pub fn pooled_counts(reports: &[MetricsReport]) -> ConfusionCounts {
    reports
        .iter()
        .fold(ConfusionCounts::default(), |acc, r| acc + r.counts)
}

const FOOTNOTE: &str =
    "Positive class: faulty. Precision with no positive predictions is 100 when \
there are no missed faults, else 0; recall with no faulty segments is 100 when there are no false \
alarms, else 0.";

/// Aligned text table, percentages to two decimals.
pub fn render_table(reports: &[MetricsReport]) -> String {
    let mut out = String::new();
    let mut machines: Vec<Machine> = reports.iter().map(|r| r.group.machine).collect();
    machines.dedup();
    for m in machines {
        let _ = writeln!(out, "Machine {m}");
        let _ = writeln!(
            out,
            "{:<26}{:>10}{:>11}{:>9}{:>10}{:>9}",
            "Test Sensor #", "Accuracy", "Precision", "Recall", "F1-Score", "Segments"
        );
        for r in reports.iter().filter(|r| r.group.machine == m) {
            let x = &r.metrics;
            let _ = writeln!(
                out,
                "{:<26}{:>10.2}{:>11.2}{:>9.2}{:>10.2}{:>9}",
                r.group.title(),
                100.0 * x.accuracy,
                100.0 * x.precision,
                100.0 * x.recall,
                100.0 * x.f1,
                r.counts.total()
            );
        }
        out.push('\n');
    }
    out.push_str(FOOTNOTE);
    out.push('\n');
    out
}

/// CSV with one row per group.
pub fn write_csv(path: impl AsRef<Path>, reports: &[MetricsReport]) -> Result<()> {
    let mut text = String::from("machine,signal,sensor,tp,fp,fn,tn,accuracy,precision,recall,f1\n");
    for r in reports {
        let g = &r.group;
        let c = &r.counts;
        let m = &r.metrics;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{:.2},{:.2},{:.2},{:.2}",
            g.machine,
            g.signal,
            g.sensor
                .map(|s| s.to_string())
                .unwrap_or_else(|| "all".into()),
            c.tp,
            c.fp,
            c.fn_,
            c.tn,
            100.0 * m.accuracy,
            100.0 * m.precision,
            100.0 * m.recall,
            100.0 * m.f1
        );
    }
    std::fs::write(path, text)?;
    Ok(())
}
