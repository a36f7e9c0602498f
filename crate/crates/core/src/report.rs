//! Versioned CSV / JSON tables.
//!
//! CSV output starts with `# tauber-lab v1 <command>`, uses `.` as the decimal
//! separator, `\n` line endings and 17 significant digits for every float, so
//! identical inputs give byte-identical files.

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::continuation::{ContinuationValue, PoleInfo};
use crate::diagnostics::{ScanRow, ExponentEstimate, OmegaBound, VerifyRow};
use crate::model::StaircaseFamily;
use crate::transform::{PartialSumTrace, SigmaEstimate};

pub const SCHEMA: &str = "tauber-lab v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(t) => {
                if t.contains([',', '"', '\n']) {
                    format!("\"{}\"", t.replace('"', "\"\""))
                } else {
                    t.clone()
                }
            }
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(t) => Value::from(t.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}
impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}
impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits in scientific notation.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `# ...` lines after the schema line.
    pub notes: Vec<String>,
    /// Emitted as a top-level `"family"` object in JSON output.
    pub family: Option<Value>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Table {
            command: command.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            family: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn with_family(mut self, family: &StaircaseFamily) -> Self {
        self.family = serde_json::to_value(family.spec()).ok();
        self.notes.push(format!(
            "family {}",
            serde_json::to_string(&family.spec()).unwrap_or_default()
        ));
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# {SCHEMA} {}\n", self.command);
        for note in &self.notes {
            out.push_str("# ");
            out.push_str(note);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, v)| (k.clone(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("schema".into(), Value::from(SCHEMA));
        doc.insert("command".into(), Value::from(self.command.as_str()));
        if let Some(f) = &self.family {
            doc.insert("family".into(), f.clone());
        }
        if !self.notes.is_empty() {
            doc.insert("notes".into(), Value::from(self.notes.clone()));
        }
        doc.insert("rows".into(), Value::Array(rows));
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).unwrap_or_default();
        text.push('\n');
        text
    }
}

fn re(z: Complex64) -> Cell {
    Cell::Float(z.re)
}
fn im(z: Complex64) -> Cell {
    Cell::Float(z.im)
}

pub fn trace_table(family: &StaircaseFamily, trace: &PartialSumTrace) -> Table {
    let mut t = Table::new(
        "transform",
        &["i", "x_i", "re_contribution", "im_contribution", "swing", "re_cumulative", "im_cumulative"],
    )
    .with_family(family);
    t.notes.push(format!("s {} {}", format_float(trace.s.re), format_float(trace.s.im)));
    for (term, cum) in trace.per_interval.iter().zip(&trace.cumulative) {
        t.push(vec![
            term.index.into(),
            term.center.into(),
            re(term.contribution),
            im(term.contribution),
            term.swing.into(),
            re(*cum),
            im(*cum),
        ]);
    }
    t
}

pub fn poles_table(family: &StaircaseFamily, poles: &[PoleInfo]) -> Table {
    let mut t = Table::new(
        "poles",
        &["j", "m", "re", "im", "cancelled", "order_ok", "re_residue", "im_residue"],
    )
    .with_family(family);
    for p in poles {
        t.push(vec![
            p.j.into(),
            p.m.into(),
            re(p.location),
            im(p.location),
            p.cancelled.into(),
            p.order_ok.into(),
            p.fitted_residue.map(|z| z.re).into(),
            p.fitted_residue.map(|z| z.im).into(),
        ]);
    }
    t
}

/// `label` is `continued` where `Re s` is at or left of the abscissa.
pub fn continuation_table(
    family: &StaircaseFamily,
    sigma_c: f64,
    values: &[(Complex64, Result<ContinuationValue, String>)],
) -> Table {
    let mut t = Table::new(
        "continue",
        &["re_s", "im_s", "re_g", "im_g", "j_max", "tail_bound", "label", "error"],
    )
    .with_family(family);
    for (s, v) in values {
        let label = if s.re <= sigma_c { "continued" } else { "convergent" };
        match v {
            Ok(v) => t.push(vec![
                re(*s),
                im(*s),
                re(v.value),
                im(v.value),
                v.j_max.into(),
                v.tail_bound.into(),
                label.into(),
                Cell::Empty,
            ]),
            Err(e) => t.push(vec![
                re(*s),
                im(*s),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                label.into(),
                e.clone().into(),
            ]),
        }
    }
    t
}

pub fn scan_table(rows: &[ScanRow]) -> Table {
    let mut t = Table::new(
        "scan",
        &["gamma", "variant", "sigma_c", "alpha_holo", "implied_gamma_2", "implied_gamma_3", "flags"],
    );
    t.notes.push(
        "rows show the exponents attained by the implemented families only; \
         they carry no evidence for an upper bound valid for every admissible f"
            .into(),
    );
    for r in rows {
        t.push(vec![
            r.gamma.into(),
            r.variant.as_str().into(),
            r.sigma_c.into(),
            r.alpha_holo.into(),
            r.implied_gamma_2.into(),
            r.implied_gamma_3.into(),
            r.flags.join(";").into(),
        ]);
    }
    t
}

pub fn sigma_table(family: &StaircaseFamily, est: &SigmaEstimate) -> Table {
    let mut t = Table::new("abscissa", &["sigma_c", "bracket_lo", "bracket_hi", "dead_zone"])
        .with_family(family);
    t.push(vec![
        est.sigma_c.into(),
        est.bracket.0.into(),
        est.bracket.1.into(),
        est.dead_zone.into(),
    ]);
    t
}

pub fn exponent_table(family: &StaircaseFamily, est: &ExponentEstimate) -> Table {
    let mut t = Table::new("exponent", &["gamma_emp", "blocks_used", "fit_residual"]).with_family(family);
    t.push(vec![est.gamma_emp.into(), est.blocks_used.into(), est.fit_residual.into()]);
    t
}

pub fn omega_table(rows: &[(f64, Result<OmegaBound, String>)]) -> Table {
    let mut t = Table::new(
        "omega",
        &["s", "x1", "x2", "re_integral", "im_integral", "bound", "pass", "error"],
    );
    for (s, r) in rows {
        match r {
            Ok(b) => t.push(vec![
                (*s).into(),
                b.x1.into(),
                b.x2.into(),
                re(b.integral),
                im(b.integral),
                b.bound.into(),
                b.pass.into(),
                Cell::Empty,
            ]),
            Err(e) => t.push(vec![
                (*s).into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                false.into(),
                e.clone().into(),
            ]),
        }
    }
    t
}

pub fn verify_table(family: &StaircaseFamily, rows: &[VerifyRow]) -> Table {
    let mut t = Table::new("verify", &["check", "result", "detail"]).with_family(family);
    for r in rows {
        t.push(vec![
            r.check.clone().into(),
            if r.pass { "PASS" } else { "FAIL" }.into(),
            r.detail.clone().into(),
        ]);
    }
    t
}

pub fn eval_table(family: &StaircaseFamily, points: &[(f64, f64, f64)]) -> Table {
    let mut t = Table::new("eval", &["x", "f", "g"]).with_family(family);
    for &(x, f, g) in points {
        t.push(vec![x.into(), f.into(), g.into()]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_fixed_width_scientific() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
        let v: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(v, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new("demo", &["a", "b", "c"]);
        t.push(vec![1.5.into(), "x,y".into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "# tauber-lab v1 demo\na,b,c\n1.5000000000000000e0,\"x,y\",\n");
        let json: Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(json["rows"][0]["a"], 1.5);
        assert!(json["rows"][0]["c"].is_null());
    }
}
