//! Pass/fail checks and the `report.txt` format.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        // NaN never passes.
        let pass = measured <= threshold;
        Check {
            name: name.into(),
            measured,
            threshold,
            relation: Relation::AtMost,
            pass,
        }
    }

    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let pass = measured >= threshold;
        Check {
            name: name.into(),
            measured,
            threshold,
            relation: Relation::AtLeast,
            pass,
        }
    }

    pub fn equal(name: impl Into<String>, measured: f64, expected: f64) -> Self {
        let pass = measured == expected;
        Check {
            name: name.into(),
            measured,
            threshold: expected,
            relation: Relation::Equal,
            pass,
        }
    }

    /// A check whose measurement could not be taken.
    pub fn missing(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            measured: f64::NAN,
            threshold: f64::NAN,
            relation: Relation::Equal,
            pass: false,
        }
    }

    pub fn line(&self) -> String {
        let op = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        };
        let status = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{status} {}: {:.6e} {op} {:.6e}",
            self.name, self.measured, self.threshold
        )
    }
}

/// `report.txt`: one line per check, then recorded values.
pub fn format_report(title: &str, checks: &[Check], values: &[(String, f64)]) -> String {
    let mut s = format!("# {title}\n");
    for c in checks {
        let _ = writeln!(s, "{}", c.line());
    }
    if !values.is_empty() {
        s.push_str("# recorded values\n");
        for (k, v) in values {
            let _ = writeln!(s, "{k} = {v:.9e}");
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "# {} checks, {} failed", checks.len(), failed);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Check::at_most("a", 1.0, 1.0).pass);
        assert!(!Check::at_most("a", f64::NAN, 1.0).pass);
        assert!(!Check::at_least("a", 0.5, 1.0).pass);
        assert!(Check::equal("a", 0.0, 0.0).pass);
        assert!(!Check::missing("a").pass);
        assert!(Check::at_most("ledger", 0.01, 0.02)
            .line()
            .starts_with("PASS ledger:"));
    }

    #[test]
    fn report_lists_each_check_once() {
        let checks = vec![
            Check::at_most("x", 1.0, 2.0),
            Check::at_least("y", 1.0, 2.0),
        ];
        let r = format_report("t", &checks, &[("c4_fit".into(), 0.5)]);
        assert_eq!(r.matches("PASS x").count(), 1);
        assert_eq!(r.matches("FAIL y").count(), 1);
        assert!(r.contains("c4_fit = "));
        assert!(r.contains("2 checks, 1 failed"));
    }
}
