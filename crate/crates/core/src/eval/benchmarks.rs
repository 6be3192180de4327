use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use crate::binio;
use crate::error::{Error, Result};

/// Word pairs with human similarity scores. Words are stored lowercased and
/// `(word1, word2)` pairs are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityBenchmark {
    pub name: String,
    pub pairs: Vec<(String, String, f64)>,
    /// Repeated pairs merged into their first occurrence by averaging scores.
    pub merged_duplicates: usize,
}

impl SimilarityBenchmark {
    /// `word1<TAB>word2<TAB>score` lines. A first line whose score does not
    /// parse is taken as a header; blank lines and `#` comments are ignored.
    pub fn read_tsv<R: BufRead>(name: &str, r: R) -> Result<Self> {
        let what = "similarity benchmark";
        let mut sums: Vec<(String, String, f64, usize)> = Vec::new();
        let mut index: HashMap<(String, String), usize> = HashMap::new();
        let mut seen_data = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() < 3 {
                return Err(Error::format(what, format!("line {}: expected word1<TAB>word2<TAB>score", lineno + 1)));
            }
            let score: f64 = match fields[2].trim().parse() {
                Ok(s) => s,
                Err(_) if !seen_data => {
                    seen_data = true;
                    continue;
                }
                Err(_) => return Err(Error::format(what, format!("line {}: bad score {:?}", lineno + 1, fields[2]))),
            };
            seen_data = true;
            if !score.is_finite() {
                return Err(Error::format(what, format!("line {}: non-finite score", lineno + 1)));
            }
            let (a, b) = (fields[0].trim().to_lowercase(), fields[1].trim().to_lowercase());
            if a.is_empty() || b.is_empty() {
                return Err(Error::format(what, format!("line {}: empty word", lineno + 1)));
            }
            match index.get(&(a.clone(), b.clone())) {
                Some(&k) => {
                    sums[k].2 += score;
                    sums[k].3 += 1;
                }
                None => {
                    index.insert((a.clone(), b.clone()), sums.len());
                    sums.push((a, b, score, 1));
                }
            }
        }
        if sums.is_empty() {
            return Err(Error::Empty(format!("{what} {name:?} has no pairs")));
        }
        let merged_duplicates = sums.iter().map(|s| s.3 - 1).sum();
        let pairs = sums.into_iter().map(|(a, b, s, c)| (a, b, s / c as f64)).collect();
        Ok(SimilarityBenchmark { name: name.to_string(), pairs, merged_duplicates })
    }

    /// Reads a file, naming the benchmark after the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        Self::read_tsv(&stem(path), binio::open(path)?)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// One analogy question `a : a_star :: b : b_star`. `b_star` may list
/// several accepted answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub a_star: String,
    pub b: String,
    pub b_star: Vec<String>,
    pub category: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalogyBenchmark {
    pub name: String,
    pub categories: Vec<String>,
    pub questions: Vec<AnalogyQuestion>,
}

impl AnalogyBenchmark {
    /// Google format: `: category` lines open sections, other lines hold four
    /// space-separated words. Questions before any header fall in `default`.
    pub fn read_google<R: BufRead>(name: &str, r: R) -> Result<Self> {
        let what = "analogy benchmark";
        let mut categories: Vec<String> = Vec::new();
        let mut questions = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(cat) = line.strip_prefix(':') {
                let cat = cat.trim();
                if cat.is_empty() {
                    return Err(Error::format(what, format!("line {}: empty category name", lineno + 1)));
                }
                categories.push(cat.to_string());
                continue;
            }
            let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            if words.len() != 4 {
                return Err(Error::format(what, format!("line {}: expected 4 words, found {}", lineno + 1, words.len())));
            }
            if categories.is_empty() {
                categories.push("default".into());
            }
            let [a, a_star, b, b_star]: [String; 4] = words.try_into().expect("length checked");
            questions.push(AnalogyQuestion { a, a_star, b, b_star: vec![b_star], category: categories.len() - 1 });
        }
        if questions.is_empty() {
            return Err(Error::Empty(format!("{what} {name:?} has no questions")));
        }
        Ok(AnalogyBenchmark { name: name.to_string(), categories, questions })
    }

    pub fn load_google(path: &Path) -> Result<Self> {
        Self::read_google(&stem(path), binio::open(path)?)
    }

    /// BATS layout: every regular file in `dir` (sorted by name) is one
    /// category with `word<TAB>answer1/answer2/...` lines. Each ordered pair of
    /// distinct lines `(x, y)` yields `x : x_ans :: y : y_answers`, with the
    /// first listed answer of `x` as `a_star`.
    pub fn load_bats_dir(dir: &Path) -> Result<Self> {
        let what = "BATS benchmark";
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| Error::File { path: dir.to_path_buf(), source: e })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut categories = Vec::new();
        let mut questions = Vec::new();
        for path in files {
            let mut entries: Vec<(String, Vec<String>)> = Vec::new();
            for (lineno, line) in binio::open(&path)?.lines().enumerate() {
                let line = line?;
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (word, answers) = line.split_once('\t').ok_or_else(|| {
                    Error::format(what, format!("{}:{}: expected word<TAB>answers", path.display(), lineno + 1))
                })?;
                let answers: Vec<String> = answers
                    .split('/')
                    .map(|s| s.trim().to_lowercase())
                    .filter(|s| !s.is_empty())
                    .collect();
                let word = word.trim().to_lowercase();
                if word.is_empty() || answers.is_empty() {
                    return Err(Error::format(what, format!("{}:{}: empty word or answer list", path.display(), lineno + 1)));
                }
                entries.push((word, answers));
            }
            let category = categories.len();
            categories.push(stem(&path));
            for (i, (a, a_ans)) in entries.iter().enumerate() {
                for (j, (b, b_ans)) in entries.iter().enumerate() {
                    if i != j {
                        questions.push(AnalogyQuestion {
                            a: a.clone(),
                            a_star: a_ans[0].clone(),
                            b: b.clone(),
                            b_star: b_ans.clone(),
                            category,
                        });
                    }
                }
            }
        }
        if questions.is_empty() {
            return Err(Error::Empty(format!("{what} at {} has no questions", dir.display())));
        }
        let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "bats".into());
        Ok(AnalogyBenchmark { name, categories, questions })
    }

    /// Directories load as BATS, files as Google format.
    pub fn load(path: &Path) -> Result<Self> {
        if path.is_dir() {
            Self::load_bats_dir(path)
        } else {
            Self::load_google(path)
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
