//! One PASS/FAIL line per acceptance criterion.

use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Default)]
pub struct Scoreboard {
    lines: Vec<Line>,
}

impl Scoreboard {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record and print one criterion.
    pub fn record(&mut self, id: u32, title: &str, passed: bool, detail: impl Into<String>) {
        let line = Line {
            id,
            title: title.to_string(),
            passed,
            detail: detail.into(),
        };
        println!("{}", format_line(&line));
        self.lines.push(line);
    }

    /// Supplementary measurement; never affects the exit code.
    pub fn note(&self, id: u32, text: &str) {
        println!("INFO [{id}] {text}");
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn failures(&self) -> usize {
        self.lines.iter().filter(|l| !l.passed).count()
    }

    /// Summary line and process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failures();
        println!(
            "acceptance: {} passed, {} failed",
            self.lines.len() - failed,
            failed
        );
        i32::from(failed > 0)
    }
}

pub fn format_line(l: &Line) -> String {
    let tag = if l.passed { "PASS" } else { "FAIL" };
    format!("{tag} [{}] {}: {}", l.id, l.title, l.detail)
}

pub fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_reflects_failures() {
        let mut s = Scoreboard::new();
        s.record(1, "a", true, "ok");
        assert_eq!(s.finish(), 0);
        s.record(2, "b", false, "bad");
        assert_eq!(s.finish(), 1);
        assert_eq!(format_line(&s.lines()[1]), "FAIL [2] b: bad");
    }
}
