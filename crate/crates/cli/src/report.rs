//! One report per subcommand, renderable as JSON, CSV or text.
//!
//! JSON goes through `serde_json::Value`, whose maps are key-sorted, so
//! parsing emitted JSON and printing it again is byte-identical.

use std::fmt::Write as _;

use hurwitz_core::engine::SweepReport;
use hurwitz_core::{
    Chamber, ChamberPolynomial, EssentialStar, Evaluation, GeometricTree, HurwitzPair, IndexSet, MultiPoly,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::Format;

const VALUE_COLUMNS: [&str; 6] = ["mu", "nu", "d", "r", "method", "value"];

pub struct Report {
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    text: String,
    /// False when the subcommand checked something and it failed.
    pub ok: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("csv output is not utf-8")]
    Utf8(#[from] std::string::FromUtf8Error),
    #[error("flushing csv output: {0}")]
    Flush(String),
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report types serialize infallibly")
}

fn comma(parts: &[u32]) -> String {
    parts.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",")
}

fn blocks(bs: &[IndexSet]) -> String {
    bs.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(" ")
}

fn tree_edges(t: &GeometricTree) -> String {
    t.edges
        .iter()
        .map(|&(a, b, w)| format!("{}-{}:{w}", t.mu_blocks[a], t.nu_blocks[b]))
        .collect::<Vec<_>>()
        .join(" ")
}

fn star_blacks(s: &EssentialStar) -> String {
    s.black
        .iter()
        .map(|(i, j)| format!("{i}|{j}"))
        .collect::<Vec<_>>()
        .join(" ")
}

impl Report {
    pub fn render(&self, format: Format) -> Result<String, RenderError> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(&self.json)? + "\n"),
            Format::Text => Ok(self.text.clone()),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row)?;
                }
                let bytes = w.into_inner().map_err(|e| RenderError::Flush(e.error().to_string()))?;
                Ok(String::from_utf8(bytes)?)
            }
        }
    }

    pub fn evaluation(ev: &Evaluation) -> Report {
        let mut text = format!("{}\n", ev.value);
        if let Some(p) = &ev.polynomial {
            let _ = writeln!(text, "chamber {}: {p}", ev.signature);
        }
        Report {
            json: to_value(ev),
            header: VALUE_COLUMNS.to_vec(),
            rows: vec![vec![
                comma(&ev.mu),
                comma(&ev.nu),
                ev.d.to_string(),
                ev.r.to_string(),
                ev.method.name().to_string(),
                ev.value.to_string(),
            ]],
            text,
            ok: true,
        }
    }

    pub fn polynomial(pair: &HurwitzPair, cp: &ChamberPolynomial) -> Report {
        let rows = cp
            .poly
            .terms()
            .map(|(mono, c)| {
                let exps: Vec<String> = mono.0.iter().map(|e| e.to_string()).collect();
                vec![cp.signature.to_string(), exps.join(" "), c.to_string()]
            })
            .collect();
        Report {
            json: json!({
                "mu": pair.mu,
                "nu": pair.nu,
                "signature": cp.signature,
                "witness": cp.witness,
                "polynomial": cp.poly,
                "display": cp.poly.to_string(),
            }),
            header: vec!["signature", "exponents", "coefficient"],
            rows,
            text: format!("chamber {}\nwitness {}\n{}\n", cp.signature, cp.witness, cp.poly),
            ok: true,
        }
    }

    pub fn chambers(m: usize, n: usize, chambers: &[Chamber]) -> Report {
        let mut text = String::new();
        for c in chambers {
            let _ = writeln!(text, "{} {}", c.signature, c.witness);
        }
        let _ = writeln!(text, "{} chambers", chambers.len());
        Report {
            json: json!({ "m": m, "n": n, "count": chambers.len(), "chambers": chambers }),
            header: vec!["signature", "witness"],
            rows: chambers
                .iter()
                .map(|c| vec![c.signature.to_string(), c.witness.to_string()])
                .collect(),
            text,
            ok: true,
        }
    }

    pub fn trees(pair: &HurwitzPair, trees: &[GeometricTree]) -> Report {
        let mut text = String::new();
        for t in trees {
            let _ = writeln!(
                text,
                "mu {} | nu {} | {}",
                blocks(&t.mu_blocks),
                blocks(&t.nu_blocks),
                tree_edges(t)
            );
        }
        let _ = writeln!(text, "{} geometric trees", trees.len());
        Report {
            json: json!({ "mu": pair.mu, "nu": pair.nu, "essential": false, "count": trees.len(), "trees": trees }),
            header: vec!["mu_blocks", "nu_blocks", "edges"],
            rows: trees
                .iter()
                .map(|t| vec![blocks(&t.mu_blocks), blocks(&t.nu_blocks), tree_edges(t)])
                .collect(),
            text,
            ok: true,
        }
    }

    pub fn stars(pair: &HurwitzPair, stars: &[EssentialStar]) -> Report {
        let mut text = String::new();
        for s in stars {
            let _ = writeln!(
                text,
                "white {} | black {} | J1 {} | u {}",
                s.white,
                star_blacks(s),
                s.j1,
                s.u()
            );
        }
        let _ = writeln!(text, "{} essential stars", stars.len());
        Report {
            json: json!({ "mu": pair.mu, "nu": pair.nu, "essential": true, "count": stars.len(), "trees": stars }),
            header: vec!["white", "black", "j1", "u"],
            rows: stars
                .iter()
                .map(|s| vec![s.white.to_string(), star_blacks(s), s.j1.to_string(), s.u().to_string()])
                .collect(),
            text,
            ok: true,
        }
    }

    pub fn sweep(report: &SweepReport) -> Report {
        let mut rows = Vec::new();
        for row in &report.rows {
            for (method, value) in &row.values {
                rows.push(vec![
                    comma(row.pair.mu.parts()),
                    comma(row.pair.nu.parts()),
                    row.pair.d().to_string(),
                    row.pair.r().to_string(),
                    method.name().to_string(),
                    value.to_string(),
                ]);
            }
        }
        let methods: Vec<&str> = report.methods.iter().map(|m| m.name()).collect();
        let mut text = format!(
            "verified {} pairs up to degree {} with {}\n",
            report.rows.len(),
            report.d_max,
            methods.join(", ")
        );
        for row in report.rows.iter().filter(|r| report.disagreements.contains(&r.pair)) {
            let vals: Vec<String> = row.values.iter().map(|(m, v)| format!("{m}={v}")).collect();
            let errs: Vec<String> = row.errors.iter().map(|(m, e)| format!("{m}: {e}")).collect();
            let _ = writeln!(text, "DISAGREE {} {} {}", row.pair, vals.join(" "), errs.join("; "));
        }
        let _ = writeln!(
            text,
            "{}",
            if report.passed() {
                "all methods agree".to_string()
            } else {
                format!("{} disagreements", report.disagreements.len())
            }
        );
        Report {
            json: to_value(report),
            header: VALUE_COLUMNS.to_vec(),
            rows,
            text,
            ok: report.passed(),
        }
    }

    pub fn identity(m: usize, lhs: &MultiPoly, rhs: &MultiPoly) -> Report {
        let holds = lhs == rhs;
        Report {
            json: json!({ "m": m, "lhs": lhs, "rhs": rhs, "holds": holds }),
            header: vec!["m", "lhs", "rhs", "holds"],
            rows: vec![vec![m.to_string(), lhs.to_string(), rhs.to_string(), holds.to_string()]],
            text: format!(
                "lhs = {lhs}\nrhs = {rhs}\n{}\n",
                if holds { "identity holds" } else { "identity FAILS" }
            ),
            ok: holds,
        }
    }
}
