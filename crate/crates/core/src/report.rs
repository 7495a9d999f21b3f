//! Verdicts and the line-oriented report format.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: true,
            detail: detail.into(),
        }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: false,
            detail: detail.into(),
        }
    }

    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "pass" } else { "fail" };
        write!(f, "{} {} {}", self.name, status, one_line(&self.detail))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inconclusive => "inconclusive",
        })
    }
}

/// A command's result: named fields plus verdicts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub command: String,
    pub fields: Vec<(String, String)>,
    pub verdicts: Vec<Verdict>,
    pub inconclusive: bool,
}

pub const REPORT_HEADER: &str = "nilcube-report v1";

fn one_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            ..Default::default()
        }
    }

    pub fn field(&mut self, key: impl Into<String>, value: impl fmt::Display) -> &mut Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn verdict(&mut self, v: Verdict) -> &mut Self {
        self.verdicts.push(v);
        self
    }

    pub fn status(&self) -> Status {
        if self.verdicts.iter().any(|v| !v.pass) {
            Status::Fail
        } else if self.inconclusive {
            Status::Inconclusive
        } else {
            Status::Pass
        }
    }

    /// Stable machine-readable rendering.
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(REPORT_HEADER);
        s.push('\n');
        s.push_str(&format!("command {}\n", self.command));
        for (k, v) in &self.fields {
            s.push_str(&format!("field {} {}\n", k, one_line(v)));
        }
        for v in &self.verdicts {
            s.push_str(&format!("verdict {v}\n"));
        }
        s.push_str(&format!("status {}\n", self.status()));
        s
    }

    /// Short summary for people.
    pub fn summary(&self) -> String {
        let mut s = format!("{}: {}\n", self.command, self.status());
        for (k, v) in &self.fields {
            s.push_str(&format!("  {k}: {v}\n"));
        }
        for v in &self.verdicts {
            let mark = if v.pass { "ok  " } else { "FAIL" };
            s.push_str(&format!("  [{mark}] {}: {}\n", v.name, v.detail));
        }
        s
    }

    /// Parse the machine rendering back.
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        if lines.next()? != REPORT_HEADER {
            return None;
        }
        let mut r = Report::default();
        let mut status = None;
        for line in lines {
            let (tag, rest) = line.split_once(' ')?;
            match tag {
                "command" => r.command = rest.to_string(),
                "field" => {
                    let (k, v) = rest.split_once(' ').unwrap_or((rest, ""));
                    r.fields.push((k.to_string(), v.to_string()));
                }
                "verdict" => {
                    let mut parts = rest.splitn(3, ' ');
                    let name = parts.next()?.to_string();
                    let pass = match parts.next()? {
                        "pass" => true,
                        "fail" => false,
                        _ => return None,
                    };
                    let detail = parts.next().unwrap_or("").to_string();
                    r.verdicts.push(Verdict { name, pass, detail });
                }
                "status" => status = Some(rest.to_string()),
                _ => return None,
            }
        }
        r.inconclusive = status.as_deref()? == "inconclusive";
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let mut r = Report::new("check");
        r.field("points", 4).field("label", "a b");
        r.verdict(Verdict::pass("ergodicity", "all 16 pairs"));
        r.verdict(Verdict::fail("completion", "corner (0,1,1)\nmissing"));
        let text = r.render();
        let back = Report::parse(&text).unwrap();
        assert_eq!(back.render(), text);
        assert_eq!(back.status(), Status::Fail);
    }
}
