use std::io::Write;
use std::path::Path;

use crate::binio;
use crate::corpus::Vocabulary;
use crate::error::Result;
use crate::eval::csv_field;

use super::{CentralityEntry, ClusterHyperbolicity, ClusterSet, CoreDecomposition};

pub const CENTRALITY_HEADER: &str = "rank,word,score,freq_percentile";
pub const CORE_HEADER: &str = "k_max,size";
pub const CORRELATION_HEADER: &str = "word_corr,level_corr";
pub const HYPERBOLICITY_HEADER: &str = "cluster_id,size,mean_delta,normalized_delta";

pub fn write_centrality_csv<W: Write>(mut w: W, entries: &[CentralityEntry], vocab: &Vocabulary) -> Result<()> {
    writeln!(w, "{CENTRALITY_HEADER}")?;
    for e in entries {
        writeln!(w, "{},{},{},{}", e.rank, csv_field(vocab.token(e.word)), e.score, e.freq_percentile)?;
    }
    Ok(())
}

pub fn write_core_csv<W: Write>(mut w: W, core: &CoreDecomposition) -> Result<()> {
    writeln!(w, "{CORE_HEADER}")?;
    writeln!(w, "{},{}", core.k_max, core.main_core.len())?;
    Ok(())
}

pub fn write_correlations_csv<W: Write>(mut w: W, word_corr: f64, level_corr: f64) -> Result<()> {
    writeln!(w, "{CORRELATION_HEADER}")?;
    writeln!(w, "{word_corr},{level_corr}")?;
    Ok(())
}

pub fn write_hyperbolicity_csv<W: Write>(mut w: W, rows: &[ClusterHyperbolicity]) -> Result<()> {
    writeln!(w, "{HYPERBOLICITY_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.cluster_id, r.size, r.mean_delta, r.normalized_delta)?;
    }
    Ok(())
}

/// `word<TAB>cluster_id` for every word vertex `0..vocab.len()`.
pub fn write_membership_tsv<W: Write>(mut w: W, clusters: &ClusterSet, vocab: &Vocabulary) -> Result<()> {
    for (id, &c) in clusters.assignment.iter().enumerate().take(vocab.len()) {
        writeln!(w, "{}\t{c}", vocab.token(id))?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn save_with(path: &Path, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let mut w = binio::create(path)?;
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let vocab = Vocabulary::from_counts([("a,b".to_string(), 3), ("c".to_string(), 1)], 2);
        let mut buf = Vec::new();
        let e = CentralityEntry { rank: 1, word: 0, score: 2.0, freq_percentile: 100.0 };
        write_centrality_csv(&mut buf, &[e], &vocab).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rank,word,score,freq_percentile\n1,\"a,b\",2,100\n");

        let mut buf = Vec::new();
        let core = CoreDecomposition { core: vec![1, 1], k_max: 1, main_core: vec![0, 1] };
        write_core_csv(&mut buf, &core).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k_max,size\n1,2\n");

        let mut buf = Vec::new();
        write_correlations_csv(&mut buf, 0.5, -0.25).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "word_corr,level_corr\n0.5,-0.25\n");

        let mut buf = Vec::new();
        let row = ClusterHyperbolicity { cluster_id: 3, size: 12, mean_delta: 0.5, normalized_delta: 0.125 };
        write_hyperbolicity_csv(&mut buf, &[row]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "cluster_id,size,mean_delta,normalized_delta\n3,12,0.5,0.125\n");

        let mut buf = Vec::new();
        let clusters = ClusterSet { assignment: vec![0, 1, 1], clusters: vec![vec![0], vec![1, 2]], iterations: 1, converged: true };
        write_membership_tsv(&mut buf, &clusters, &vocab).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\t0\nc\t1\n");
    }
}
