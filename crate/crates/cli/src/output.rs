//! Self-describing CSV/JSON output. Floats use the shortest round-trip
//! decimal representation; nothing time- or host-dependent is written.

use std::fmt::Write as _;

use serde_json::{json, Map, Value as Json};

use crate::config::{Format, RunConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Float(f64),
    Count(u64),
    Bool(bool),
    Text(String),
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Float(x) => float_text(*x),
            Field::Count(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
        }
    }

    fn to_json(&self) -> Json {
        match self {
            Field::Float(x) => float_json(*x),
            Field::Count(n) => json!(n),
            Field::Bool(b) => json!(b),
            Field::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Field {
    fn from(x: f64) -> Self {
        Field::Float(x)
    }
}

impl From<bool> for Field {
    fn from(b: bool) -> Self {
        Field::Bool(b)
    }
}

impl From<usize> for Field {
    fn from(n: usize) -> Self {
        Field::Count(n as u64)
    }
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Text(s.to_string())
    }
}

fn float_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn float_json(x: f64) -> Json {
    serde_json::Number::from_f64(x)
        .map(Json::Number)
        .unwrap_or_else(|| Json::String(float_text(x)))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    /// Fock truncation of the state the command worked on.
    pub n_max: Option<usize>,
    pub generator: Option<&'static str>,
    pub summary: Vec<(&'static str, Field)>,
    pub table: Option<Table>,
}

impl Report {
    pub fn with(mut self, key: &'static str, value: impl Into<Field>) -> Self {
        self.summary.push((key, value.into()));
        self
    }
}

fn provenance(cfg: &RunConfig, report: &Report) -> Vec<(&'static str, Field)> {
    let mut p = vec![
        ("artifact", Field::from("atomsqueeze")),
        ("version", Field::from(atomsqueeze::VERSION)),
        ("command", Field::from(cfg.command.name())),
        ("format", Field::from(cfg.format.as_str())),
        ("convention", Field::from(atomsqueeze::wigner::CONVENTION)),
        ("seed", cfg.seed.map_or(Field::from("none"), Field::Count)),
    ];
    if let Some(n) = report.n_max {
        p.push(("n_max", n.into()));
    }
    if let Some(g) = report.generator {
        p.push(("generator", g.into()));
    }
    p
}

pub fn render(cfg: &RunConfig, report: &Report) -> String {
    match cfg.format {
        Format::Json => render_json(cfg, report),
        Format::Csv => render_csv(cfg, report),
    }
}

fn render_json(cfg: &RunConfig, report: &Report) -> String {
    let mut prov: Map<String, Json> = provenance(cfg, report)
        .into_iter()
        .map(|(k, v)| (k.into(), v.to_json()))
        .collect();
    let params: Map<String, Json> = cfg
        .params
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v.render())))
        .collect();
    prov.insert("parameters".into(), Json::Object(params));
    let mut root = Map::new();
    root.insert("provenance".into(), Json::Object(prov));
    let result: Map<String, Json> = report
        .summary
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_json()))
        .collect();
    root.insert("result".into(), Json::Object(result));
    if let Some(t) = &report.table {
        root.insert("columns".into(), json!(t.columns));
        let rows: Vec<Json> = t
            .rows
            .iter()
            .map(|r| Json::Array(r.iter().map(|&x| float_json(x)).collect()))
            .collect();
        root.insert("rows".into(), Json::Array(rows));
    }
    let mut s = serde_json::to_string_pretty(&Json::Object(root)).expect("report serializes");
    s.push('\n');
    s
}

fn render_csv(cfg: &RunConfig, report: &Report) -> String {
    let mut s = String::new();
    for (k, v) in provenance(cfg, report) {
        writeln!(s, "# {k} = {}", v.render()).unwrap();
    }
    for (k, v) in &cfg.params {
        writeln!(s, "# param {k} = {}", v.render()).unwrap();
    }
    match &report.table {
        Some(t) => {
            for (k, v) in &report.summary {
                writeln!(s, "# result {k} = {}", v.render()).unwrap();
            }
            writeln!(s, "{}", t.columns.join(",")).unwrap();
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(|&x| float_text(x)).collect();
                writeln!(s, "{}", cells.join(",")).unwrap();
            }
        }
        None => {
            let keys: Vec<&str> = report.summary.iter().map(|(k, _)| *k).collect();
            let vals: Vec<String> = report.summary.iter().map(|(_, v)| v.render()).collect();
            writeln!(s, "{}", keys.join(",")).unwrap();
            writeln!(s, "{}", vals.join(",")).unwrap();
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{resolve, Command};
    use std::collections::BTreeMap;

    fn cfg(format: &str) -> RunConfig {
        let flags = [("format".to_string(), format.to_string())].into_iter().collect();
        resolve(Command::Variance, BTreeMap::new(), flags).unwrap()
    }

    fn report() -> Report {
        Report {
            n_max: Some(1),
            table: Some(Table {
                columns: vec!["x", "y"],
                rows: vec![vec![0.1, f64::INFINITY], vec![1.0, -2.5e-7]],
            }),
            ..Report::default()
        }
        .with("variance", 0.1875)
    }

    #[test]
    fn csv_layout() {
        let s = render(&cfg("csv"), &report());
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines.contains(&"# command = variance"));
        assert!(lines.contains(&"# param beta = 0.5"));
        assert!(lines.contains(&"# result variance = 0.1875"));
        assert_eq!(&lines[lines.len() - 3..], ["x,y", "0.1,inf", "1.0,-2.5e-7"]);
        assert!(!s.contains('\r'));
    }

    #[test]
    fn json_layout() {
        let s = render(&cfg("json"), &report());
        let v: Json = serde_json::from_str(&s).unwrap();
        assert_eq!(v["result"]["variance"], 0.1875);
        assert_eq!(v["provenance"]["parameters"]["beta"], "0.5");
        assert_eq!(v["provenance"]["n_max"], 1);
        assert_eq!(v["rows"][0][1], "inf");
    }

    #[test]
    fn scalar_csv_has_header_and_one_row() {
        let r = Report::default().with("variance", 0.1875).with("squeezed", true);
        let s = render(&cfg("csv"), &r);
        let body: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, ["variance,squeezed", "0.1875,true"]);
    }
}
