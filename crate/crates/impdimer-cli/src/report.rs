//! Reports with provenance and their text, CSV, JSON and DOT renderings.

use impdimer::lattice::GridSpec;
use impdimer::linalg::RationalScalar;
use serde_json::{json, Map, Value};

use crate::args::{terminal_text, Format};
use crate::CliError;

/// Inputs that determine a report.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    /// Subcommand and mode, for example `count` or `asym chain`.
    pub command: String,
    /// Shape in `rect:WxH` or `chain:N` notation.
    pub shape: Option<String>,
    /// Terminals in command-line notation.
    pub terminals: Vec<String>,
    /// Formula route or computation method.
    pub route: String,
    /// Sampler seed.
    pub seed: Option<u64>,
}

impl Provenance {
    /// Provenance of a command on a grid.
    pub fn grid(command: &str, spec: &GridSpec, route: &str) -> Self {
        Provenance {
            command: command.into(),
            shape: Some(spec.shape.to_string()),
            terminals: spec
                .terminals
                .iter()
                .map(|&t| terminal_text(spec.shape, t))
                .collect(),
            route: route.into(),
            seed: None,
        }
    }

    /// Provenance of a command without a grid.
    pub fn plain(command: &str, route: &str) -> Self {
        Provenance {
            command: command.into(),
            route: route.into(),
            ..Provenance::default()
        }
    }

    /// Adds the sampler seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("command", self.command.clone())];
        if let Some(s) = &self.shape {
            out.push(("shape", s.clone()));
            out.push(("terminals", self.terminals.join(" ")));
        }
        out.push(("route", self.route.clone()));
        if let Some(seed) = self.seed {
            out.push(("seed", seed.to_string()));
        }
        out.push(("impdimer", impdimer::VERSION.to_string()));
        out.push(("impdimer-cli", env!("CARGO_PKG_VERSION").to_string()));
        out
    }

    /// JSON object of the provenance fields.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), json!(self.command));
        if let Some(s) = &self.shape {
            m.insert("shape".into(), json!(s));
            m.insert("terminals".into(), json!(self.terminals));
        }
        m.insert("route".into(), json!(self.route));
        if let Some(seed) = self.seed {
            m.insert("seed".into(), json!(seed));
        }
        m.insert(
            "versions".into(),
            json!({"impdimer": impdimer::VERSION, "impdimer-cli": env!("CARGO_PKG_VERSION")}),
        );
        Value::Object(m)
    }

    fn comment_block(&self) -> String {
        self.pairs()
            .into_iter()
            .map(|(k, v)| format!("# {k}: {v}\n"))
            .collect()
    }
}

/// A rendered-on-demand command result.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// Inputs of the run.
    pub provenance: Provenance,
    /// JSON payload.
    pub data: Value,
    /// Text body.
    pub text: String,
    /// CSV body without provenance lines.
    pub csv: Option<String>,
    /// DOT body.
    pub dot: Option<String>,
    /// False when a verification failed.
    pub passed: bool,
}

impl Report {
    /// Report with JSON and text bodies.
    pub fn new(provenance: Provenance, data: Value, text: String) -> Self {
        Report {
            provenance,
            data,
            text,
            csv: None,
            dot: None,
            passed: true,
        }
    }

    /// Adds a CSV body.
    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    /// Renders the report. Text is the default; DOT is available for graphs only.
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Text => Ok(format!("{}{}", self.text, self.provenance.comment_block())),
            Format::Json => {
                let doc = json!({"schema": 1, "provenance": self.provenance.to_json(), "data": self.data});
                let mut s =
                    serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => match &self.csv {
                Some(csv) => Ok(format!("{}{csv}", self.provenance.comment_block())),
                None => Err(CliError::Usage(format!(
                    "{} has no CSV form",
                    self.provenance.command
                ))),
            },
            Format::Dot => match &self.dot {
                Some(dot) => Ok(format!(
                    "{}{dot}",
                    self.provenance.comment_block().replace("# ", "// ")
                )),
                None => Err(CliError::Usage(format!(
                    "{} has no DOT form",
                    self.provenance.command
                ))),
            },
        }
    }
}

/// Numerator and denominator of an exact rational as decimal strings.
pub fn fraction_parts(r: &RationalScalar) -> (String, String) {
    (r.numer().to_string(), r.denom().to_string())
}

/// JSON object `{"num": .., "den": ..}` of an exact rational.
pub fn fraction_json(r: &RationalScalar) -> Value {
    let (n, d) = fraction_parts(r);
    json!({"num": n, "den": d})
}

#[cfg(test)]
mod tests {
    use super::*;
    use impdimer::linalg::ratio;

    #[test]
    fn renderings_carry_provenance() {
        let r = Report::new(
            Provenance::plain("asym grid", "spectral"),
            json!({"x": 1}),
            "body\n".into(),
        )
        .with_csv("a,b\n1,2\n".into());
        let text = r.render(Format::Text).unwrap();
        assert!(text.starts_with("body\n") && text.contains("# route: spectral"));
        assert!(r.render(Format::Csv).unwrap().ends_with("a,b\n1,2\n"));
        let doc: Value = serde_json::from_str(&r.render(Format::Json).unwrap()).unwrap();
        assert_eq!(doc["schema"], 1);
        assert_eq!(doc["provenance"]["versions"]["impdimer"], impdimer::VERSION);
        assert!(matches!(r.render(Format::Dot), Err(CliError::Usage(_))));
    }

    #[test]
    fn fractions_are_reduced() {
        assert_eq!(
            fraction_parts(&ratio(6, -8)),
            ("-3".to_string(), "4".to_string())
        );
    }
}
