use std::io::Write;
use std::path::Path;

use super::analogy::AnalogyResult;
use super::similarity::SimilarityResult;
use crate::binio;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub benchmark: String,
    pub metric: String,
    pub value: f64,
    pub attempted: usize,
    pub skipped: usize,
}

/// Rows of `benchmark,metric,value,attempted,skipped`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "benchmark,metric,value,attempted,skipped";

    pub fn push(&mut self, benchmark: &str, metric: &str, value: f64, attempted: usize, skipped: usize) {
        self.rows.push(ReportRow {
            benchmark: benchmark.to_string(),
            metric: metric.to_string(),
            value,
            attempted,
            skipped,
        });
    }

    /// One `spearman_<policy>` row.
    pub fn add_similarity(&mut self, r: &SimilarityResult, policy: &str) {
        self.push(&r.benchmark, &format!("spearman_{policy}"), r.spearman, r.attempted, r.skipped);
    }

    /// An overall `accuracy` row followed by one `accuracy` row per category,
    /// named `benchmark/category`. Multi-answer questions count any listed answer.
    pub fn add_analogy(&mut self, r: &AnalogyResult) {
        self.push(&r.benchmark, "accuracy", r.accuracy(), r.attempted, r.skipped);
        for c in &r.categories {
            self.push(&format!("{}/{}", r.benchmark, c.name), "accuracy", c.accuracy(), c.attempted, c.skipped);
        }
    }

    pub fn get(&self, benchmark: &str, metric: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.benchmark == benchmark && r.metric == metric).map(|r| r.value)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", csv_field(&r.benchmark), csv_field(&r.metric), r.value, r.attempted, r.skipped)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(binio::create(path)?)
    }
}

/// Quotes fields containing commas, quotes or newlines.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut rep = EvalReport::default();
        rep.push("ws353", "spearman_skip", 0.5, 300, 3);
        rep.push("a,b", "accuracy", 0.25, 4, 0);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "benchmark,metric,value,attempted,skipped\nws353,spearman_skip,0.5,300,3\n\"a,b\",accuracy,0.25,4,0\n");
        assert_eq!(rep.get("ws353", "spearman_skip"), Some(0.5));
    }
}
