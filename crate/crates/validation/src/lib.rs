//! Bookkeeping for the acceptance target: each criterion runs alone, is
//! timed against its budget and reports a single line.

use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub criterion: u32,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Verdict {
    /// Passed both the check and the time budget.
    pub fn ok(&self) -> bool {
        self.pass && self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        let over = if self.pass && self.elapsed > self.budget { ", over budget" } else { "" };
        format!(
            "criterion {:>2}: {} ({:.2} s of {} s{over}) {}",
            self.criterion,
            if self.ok() { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

/// Runs `check`, which returns whether the criterion holds and a
/// one-line explanation. A panic inside `check` counts as a failure.
pub fn evaluate(criterion: u32, budget_secs: u64, check: impl FnOnce() -> (bool, String)) -> Verdict {
    let start = Instant::now();
    let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    Verdict {
        criterion,
        pass,
        detail,
        elapsed,
        budget: Duration::from_secs(budget_secs),
    }
}

/// Criterion numbers selected by command-line arguments; all when none
/// parse as numbers.
pub fn selected(args: impl IntoIterator<Item = String>, all: u32) -> Vec<u32> {
    let picked: Vec<u32> = args.into_iter().filter_map(|a| a.parse().ok()).filter(|n| (1..=all).contains(n)).collect();
    if picked.is_empty() {
        (1..=all).collect()
    } else {
        picked
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_fail_and_budget_counts() {
        let v = evaluate(1, 5, || panic!("boom"));
        assert!(!v.ok() && v.line().contains("boom"));
        let mut v = evaluate(2, 5, || (true, "fine".into()));
        assert!(v.ok() && v.line().starts_with("criterion  2: PASS"));
        v.elapsed = Duration::from_secs(6);
        assert!(!v.ok() && v.line().contains("over budget"));
    }

    #[test]
    fn selection() {
        assert_eq!(selected(vec!["--nocapture".to_string()], 3), vec![1, 2, 3]);
        assert_eq!(selected(vec!["2".to_string(), "9".to_string()], 3), vec![2]);
    }
}
