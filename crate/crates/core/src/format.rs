//! Text formats: the versioned scheme file and the comparison tables.

use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, ComparisonRow, MemShareRow};
use crate::design::{enumerate_codewords, ResolvableDesign, SchemeParams};
use crate::scheme::{build_mn_scheme, build_proposed_scheme, CachingScheme, SchemeSource};
use crate::{Error, Rational, Result};

pub const SCHEME_FORMAT: &str = "spc-caching-scheme";
pub const SCHEME_VERSION: u32 = 1;

/// On-disk scheme description. Every derived field is stored so the file can
/// be audited by hand, and every one is checked against a rebuild on load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub format: String,
    pub version: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub users: usize,
    /// `M/N` as `"num/den"`.
    pub cache_ratio: String,
    pub files: usize,
    pub subpacketization: usize,
    /// Rows of `T`, symbols separated by spaces. Proposed schemes only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub codebook: Vec<String>,
    /// One `0`/`1` string per user, one character per subfile.
    pub placement: Vec<String>,
    pub user_labels: Vec<String>,
    pub subfile_labels: Vec<String>,
}

/// A scheme read back from disk, with its design when it has one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedScheme {
    pub scheme: CachingScheme,
    pub design: Option<ResolvableDesign>,
}

impl SchemeFile {
    pub fn from_scheme(scheme: &CachingScheme) -> Self {
        let (q, k, codebook) = match scheme.source() {
            SchemeSource::Proposed(p) => {
                let t = enumerate_codewords(p);
                let rows = t
                    .rows()
                    .iter()
                    .map(|r| r.iter().map(usize::to_string).collect::<Vec<_>>().join(" "))
                    .collect();
                (Some(p.q()), Some(p.k()), rows)
            }
            SchemeSource::Mn { .. } => (None, None, Vec::new()),
        };
        let placement = (0..scheme.users())
            .map(|u| {
                scheme
                    .placement_row(u)
                    .iter()
                    .map(|&c| if c { '1' } else { '0' })
                    .collect()
            })
            .collect();
        SchemeFile {
            format: SCHEME_FORMAT.into(),
            version: SCHEME_VERSION,
            kind: scheme.kind().as_str().into(),
            q,
            k,
            users: scheme.users(),
            cache_ratio: scheme.cache_ratio().to_string(),
            files: scheme.file_count(),
            subpacketization: scheme.subpacketization(),
            codebook,
            placement,
            user_labels: scheme.user_labels().to_vec(),
            subfile_labels: scheme.subfile_labels().to_vec(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scheme file serializes");
        s.push('\n');
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    /// Rebuild the scheme from its parameters and check that every stored
    /// field agrees with the rebuild.
    pub fn load(&self) -> Result<LoadedScheme> {
        if self.format != SCHEME_FORMAT {
            return Err(Error::Malformed(format!("unknown format {:?}", self.format)));
        }
        if self.version != SCHEME_VERSION {
            return Err(Error::Malformed(format!(
                "unsupported version {} (expected {SCHEME_VERSION})",
                self.version
            )));
        }
        let ratio = Rational::from_str(&self.cache_ratio)
            .map_err(|_| Error::Malformed(format!("bad cache_ratio {:?}", self.cache_ratio)))?;
        let loaded = match self.kind.as_str() {
            "proposed" => {
                let (q, k) = self.q.zip(self.k).ok_or_else(|| {
                    Error::Malformed("proposed scheme needs q and k".into())
                })?;
                let design = ResolvableDesign::build(enumerate_codewords(SchemeParams::new(q, k)?));
                let scheme = build_proposed_scheme(&design, self.files)?;
                LoadedScheme {
                    scheme,
                    design: Some(design),
                }
            }
            "mn" => LoadedScheme {
                scheme: build_mn_scheme(self.users, ratio, self.files)?,
                design: None,
            },
            other => return Err(Error::Malformed(format!("unknown scheme kind {other:?}"))),
        };

        let rebuilt = SchemeFile::from_scheme(&loaded.scheme);
        if let Some(field) = self.first_difference(&rebuilt) {
            return Err(Error::Malformed(format!(
                "field `{field}` does not match the scheme its parameters describe"
            )));
        }
        Ok(loaded)
    }

    fn first_difference(&self, other: &SchemeFile) -> Option<&'static str> {
        let ratio_ok = Rational::from_str(&self.cache_ratio).ok()
            == Rational::from_str(&other.cache_ratio).ok();
        [
            ("kind", self.kind == other.kind),
            ("q", self.q == other.q),
            ("k", self.k == other.k),
            ("users", self.users == other.users),
            ("cache_ratio", ratio_ok),
            ("subpacketization", self.subpacketization == other.subpacketization),
            ("codebook", self.codebook == other.codebook),
            ("placement", self.placement == other.placement),
            ("user_labels", self.user_labels == other.user_labels),
            ("subfile_labels", self.subfile_labels == other.subfile_labels),
        ]
        .into_iter()
        .find(|(_, ok)| !ok)
        .map(|(name, _)| name)
    }
}

pub fn export_scheme(scheme: &CachingScheme) -> String {
    SchemeFile::from_scheme(scheme).to_text()
}

pub fn import_scheme(text: &str) -> Result<LoadedScheme> {
    SchemeFile::parse(text)?.load()
}

/// A comparison row with its optional memory-sharing companion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub cmp: ComparisonRow,
    pub memshare: Option<MemShareRow>,
}

/// Memory sharing is only defined for `q = 2` and integral `t = (2k-2)/3`.
pub fn with_memshare(rows: Vec<ComparisonRow>, enabled: bool) -> Vec<TableRow> {
    rows.into_iter()
        .map(|cmp| {
            let memshare = (enabled && cmp.q == 2)
                .then(|| analysis::memshare_comparison(cmp.k).ok())
                .flatten()
                .map(|c| c.row);
            TableRow { cmp, memshare }
        })
        .collect()
}

pub const CSV_HEADER: &str = "K,q,k,R_mn,R_star,F_mn,F_star";
pub const CSV_MEMSHARE_HEADER: &str = ",t,R_ms,F_ms";

/// Machine format: rates as exact fractions, subpacketizations as integers.
pub fn render_csv(rows: &[TableRow], memshare: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    if memshare {
        out.push_str(CSV_MEMSHARE_HEADER);
    }
    out.push('\n');
    for r in rows {
        let c = &r.cmp;
        out.push_str(&format!(
            "{},{},{},{},{},{},{}",
            c.users, c.q, c.k, c.rate_mn, c.rate_star, c.subpack_mn, c.subpack_star
        ));
        if memshare {
            match &r.memshare {
                Some(m) => out.push_str(&format!(",{},{},{}", m.t, m.rate, m.subpack)),
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Malformed("empty csv".into()))?;
    let memshare = match header {
        h if h == CSV_HEADER => false,
        h if h == format!("{CSV_HEADER}{CSV_MEMSHARE_HEADER}") => true,
        h => return Err(Error::Malformed(format!("unexpected csv header {h:?}"))),
    };
    let bad = |line: &str| Error::Malformed(format!("bad csv line {line:?}"));
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != if memshare { 10 } else { 7 } {
                return Err(bad(line));
            }
            let int = |s: &str| s.parse::<u64>().map_err(|_| bad(line));
            let big = |s: &str| BigUint::from_str(s).map_err(|_| bad(line));
            let rat = |s: &str| Rational::from_str(s).map_err(|_| bad(line));
            let cmp = ComparisonRow {
                users: int(f[0])?,
                q: int(f[1])?,
                k: int(f[2])?,
                rate_mn: rat(f[3])?,
                rate_star: rat(f[4])?,
                subpack_mn: big(f[5])?,
                subpack_star: big(f[6])?,
            };
            let memshare = if memshare && !f[7].is_empty() {
                Some(MemShareRow {
                    k: cmp.k,
                    t: int(f[7])?,
                    rate: rat(f[8])?,
                    subpack: big(f[9])?,
                })
            } else {
                None
            };
            Ok(TableRow { cmp, memshare })
        })
        .collect()
}

/// Two-decimal rendering with trailing zeros dropped (`0.80` → `0.8`).
pub fn short_decimal(r: Rational) -> String {
    let s = analysis::format_decimal(r, 2);
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Aligned table with one column per `K`, quantities down the side.
pub fn render_table(rows: &[TableRow], memshare: bool) -> String {
    let mut lines: Vec<(&str, Vec<String>)> = vec![
        ("K", rows.iter().map(|r| r.cmp.users.to_string()).collect()),
        ("R^MN", rows.iter().map(|r| short_decimal(r.cmp.rate_mn)).collect()),
        ("R*", rows.iter().map(|r| short_decimal(r.cmp.rate_star)).collect()),
        ("F^MN", rows.iter().map(|r| r.cmp.subpack_mn.to_string()).collect()),
        ("F*", rows.iter().map(|r| r.cmp.subpack_star.to_string()).collect()),
    ];
    if memshare {
        let ms = |f: &dyn Fn(&MemShareRow) -> String| -> Vec<String> {
            rows.iter()
                .map(|r| r.memshare.as_ref().map_or_else(|| "-".into(), f))
                .collect()
        };
        lines.push(("t", ms(&|m| m.t.to_string())));
        lines.push(("R^MN,MS", ms(&|m| short_decimal(m.rate))));
        lines.push(("F^MN,MS", ms(&|m| m.subpack.to_string())));
    }

    let label_w = lines.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let col_w: Vec<usize> = (0..rows.len())
        .map(|i| lines.iter().map(|(_, v)| v[i].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (label, values) in &lines {
        out.push_str(&format!("{label:<label_w$}"));
        for (v, w) in values.iter().zip(&col_w) {
            out.push_str(&format!("  {v:>w$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::comparison_table;

    fn proposed(q: usize, k: usize) -> CachingScheme {
        let d = ResolvableDesign::build(enumerate_codewords(SchemeParams::new(q, k).unwrap()));
        build_proposed_scheme(&d, 4).unwrap()
    }

    #[test]
    fn scheme_file_shape() {
        let f = SchemeFile::from_scheme(&proposed(2, 3));
        assert_eq!(f.codebook, vec!["0 0 1 1", "0 1 0 1", "0 1 1 0"]);
        assert_eq!(f.placement[0], "1100");
        assert_eq!(f.cache_ratio, "1/2");
        let text = f.to_text();
        assert!(text.contains("\"version\": 1"));
        assert_eq!(SchemeFile::parse(&text).unwrap(), f);
    }

    #[test]
    fn round_trip() {
        let schemes = [
            proposed(2, 3),
            proposed(3, 4),
            build_mn_scheme(6, Rational::new(1, 2), 6).unwrap(),
        ];
        for s in schemes {
            let text = export_scheme(&s);
            let loaded = import_scheme(&text).unwrap();
            assert_eq!(loaded.scheme, s);
            assert_eq!(export_scheme(&loaded.scheme), text);
            assert_eq!(loaded.design.is_some(), s.params().is_some());
        }
    }

    #[test]
    fn tampering_is_rejected() {
        let mut f = SchemeFile::from_scheme(&proposed(2, 3));
        f.placement[2] = "1001".into();
        let err = f.load().unwrap_err();
        assert!(err.to_string().contains("placement"), "{err}");

        let mut f = SchemeFile::from_scheme(&proposed(2, 3));
        f.version = 2;
        assert!(matches!(f.load(), Err(Error::Malformed(_))));

        let mut f = SchemeFile::from_scheme(&proposed(2, 3));
        f.kind = "other".into();
        assert!(f.load().is_err());

        let mut f = SchemeFile::from_scheme(&build_mn_scheme(4, Rational::new(1, 2), 2).unwrap());
        f.cache_ratio = "half".into();
        assert!(matches!(f.load(), Err(Error::Malformed(_))));

        assert!(matches!(SchemeFile::parse("{"), Err(Error::Malformed(_))));
    }

    #[test]
    fn bad_params_in_file_surface_as_invalid() {
        let mut f = SchemeFile::from_scheme(&proposed(2, 3));
        f.q = Some(1);
        assert!(matches!(f.load(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn csv_round_trip() {
        let rows = with_memshare(comparison_table(2, 1..=10).unwrap(), true);
        let text = render_csv(&rows, true);
        assert!(text.starts_with("K,q,k,R_mn,R_star,F_mn,F_star,t,R_ms,F_ms\n"));
        assert!(text.contains("\n8,2,4,4/5,1,70,8,2,8/7,56\n"));
        assert_eq!(parse_csv(&text).unwrap(), rows);

        let plain = with_memshare(comparison_table(3, 2..=4).unwrap(), false);
        let text = render_csv(&plain, false);
        assert_eq!(parse_csv(&text).unwrap(), plain);
        assert!(parse_csv("K,q\n1,2\n").is_err());
    }

    #[test]
    fn table_layout() {
        let rows = with_memshare(comparison_table(2, 2..=3).unwrap(), false);
        let t = render_table(&rows, false);
        assert_eq!(
            t,
            "K        4     6\nR^MN  0.67  0.75\nR*       1     1\nF^MN     6    20\nF*       2     4\n"
        );
    }
}
