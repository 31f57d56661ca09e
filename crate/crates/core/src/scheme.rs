//! Uncoded placements: which subfiles of every file each user caches.

use std::collections::HashMap;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::design::{ResolvableDesign, SchemeParams, MAX_SUBPACKETIZATION};
use crate::{analysis, Error, Rational, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Users are blocks of the SPC resolvable design, subfiles are its points.
    Proposed,
    /// Maddah-Ali–Niesen: users are points of `[K]`, subfiles are `t`-subsets.
    Mn,
}

impl SchemeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::Mn => "mn",
        }
    }
}

/// How a scheme was parameterized; enough to rebuild it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSource {
    Proposed(SchemeParams),
    Mn { users: usize, t: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachingScheme {
    source: SchemeSource,
    file_count: usize,
    cache_ratio: Rational,
    subpacketization: usize,
    /// Row-major `users x subpacketization` incidence.
    placement: Vec<bool>,
    user_labels: Vec<String>,
    subfile_labels: Vec<String>,
    /// MN only: the `t`-subset behind each subfile index.
    subsets: Vec<Vec<usize>>,
}

impl CachingScheme {
    pub fn kind(&self) -> SchemeKind {
        match self.source {
            SchemeSource::Proposed(_) => SchemeKind::Proposed,
            SchemeSource::Mn { .. } => SchemeKind::Mn,
        }
    }

    pub fn source(&self) -> SchemeSource {
        self.source
    }

    /// SPC parameters, for proposed schemes.
    pub fn params(&self) -> Option<SchemeParams> {
        match self.source {
            SchemeSource::Proposed(p) => Some(p),
            SchemeSource::Mn { .. } => None,
        }
    }

    pub fn users(&self) -> usize {
        self.user_labels.len()
    }

    pub fn file_count(&self) -> usize {
        self.file_count
    }

    pub fn with_file_count(mut self, files: usize) -> Result<Self> {
        if files == 0 {
            return Err(Error::InvalidParams("file count must be ≥ 1".into()));
        }
        self.file_count = files;
        Ok(self)
    }

    /// `M/N`.
    pub fn cache_ratio(&self) -> Rational {
        self.cache_ratio
    }

    /// `F_s`: subfiles per file.
    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    pub fn caches(&self, user: usize, subfile: usize) -> bool {
        self.placement[user * self.subpacketization + subfile]
    }

    pub fn placement_row(&self, user: usize) -> &[bool] {
        let f = self.subpacketization;
        &self.placement[user * f..(user + 1) * f]
    }

    /// Sorted subfile indices cached by `user`.
    pub fn cached_subfiles(&self, user: usize) -> Vec<usize> {
        self.placement_row(user)
            .iter()
            .positions(|&c| c)
            .collect()
    }

    pub fn row_weight(&self, user: usize) -> usize {
        self.placement_row(user).iter().filter(|&&c| c).count()
    }

    pub fn user_labels(&self) -> &[String] {
        &self.user_labels
    }

    pub fn subfile_labels(&self) -> &[String] {
        &self.subfile_labels
    }

    /// `t`-subsets indexing the subfiles of an MN scheme (empty otherwise).
    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Rate the delivery schedule for this scheme achieves, in files.
    pub fn nominal_rate(&self) -> Rational {
        match self.source {
            SchemeSource::Proposed(p) => Rational::from_integer(p.q() as u64 - 1),
            SchemeSource::Mn { users, .. } => analysis::rate_mn(users as u64, self.cache_ratio),
        }
    }
}

fn check_files(files: usize) -> Result<()> {
    if files == 0 {
        return Err(Error::InvalidParams("file count must be ≥ 1".into()));
    }
    Ok(())
}

fn label_points(points: &[usize]) -> String {
    if points.iter().all(|&p| p < 9) {
        points.iter().map(|p| (p + 1).to_string()).collect()
    } else {
        points.iter().map(|p| (p + 1).to_string()).join(",")
    }
}

/// Users are bound to blocks class-major: user `class*q + label` holds
/// block `B(class, label)` and caches exactly the subfiles at its points.
pub fn build_proposed_scheme(design: &ResolvableDesign, files: usize) -> Result<CachingScheme> {
    check_files(files)?;
    let params = design.params();
    let f = params.subpacketization();
    let mut placement = vec![false; params.users() * f];
    let mut user_labels = Vec::with_capacity(params.users());
    for (user, (_, block)) in design.blocks().enumerate() {
        for &p in block {
            placement[user * f + p] = true;
        }
        user_labels.push(label_points(block));
    }
    Ok(CachingScheme {
        source: SchemeSource::Proposed(params),
        file_count: files,
        cache_ratio: Rational::new(1, params.q() as u64),
        subpacketization: f,
        placement,
        user_labels,
        subfile_labels: (1..=f).map(|s| s.to_string()).collect(),
        subsets: Vec::new(),
    })
}

/// MN placement with `t = K*M/N`; subfiles are the `t`-subsets of `[K]` in
/// lexicographic order and user `i` caches subset `S` iff `i ∈ S`.
pub fn build_mn_scheme(users: usize, cache_ratio: Rational, files: usize) -> Result<CachingScheme> {
    check_files(files)?;
    if users < 2 {
        return Err(Error::InvalidParams(format!("K must be ≥ 2 (got {users})")));
    }
    if cache_ratio.is_zero() || cache_ratio >= Rational::one() {
        return Err(Error::InvalidParams(format!(
            "M/N must lie strictly between 0 and 1 (got {cache_ratio})"
        )));
    }
    let t = cache_ratio * Rational::from_integer(users as u64);
    if !t.is_integer() {
        return Err(Error::InvalidParams(format!(
            "t = K·M/N = {t} must be an integer"
        )));
    }
    let t = t.to_integer() as usize;
    let f = analysis::binomial(users as u64, t as u64);
    if f > MAX_SUBPACKETIZATION.into() {
        return Err(Error::InvalidParams(format!(
            "subpacketization C({users},{t}) = {f} exceeds {MAX_SUBPACKETIZATION}"
        )));
    }

    let subsets: Vec<Vec<usize>> = (0..users).combinations(t).collect();
    let f = subsets.len();
    let mut placement = vec![false; users * f];
    for (s, subset) in subsets.iter().enumerate() {
        for &u in subset {
            placement[u * f + s] = true;
        }
    }
    Ok(CachingScheme {
        source: SchemeSource::Mn { users, t },
        file_count: files,
        cache_ratio,
        subpacketization: f,
        placement,
        user_labels: (1..=users).map(|u| u.to_string()).collect(),
        subfile_labels: subsets.iter().map(|s| format!("{{{}}}", label_points(s))).collect(),
        subsets,
    })
}

/// Lookup from MN `t`-subset to subfile index.
pub(crate) fn subset_index(scheme: &CachingScheme) -> HashMap<&[usize], usize> {
    scheme
        .subsets
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect()
}

/// `demands[u]` is the 0-based file index requested by user `u`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemandVector(Vec<usize>);

impl DemandVector {
    pub fn new(demands: Vec<usize>, files: usize) -> Result<Self> {
        if let Some((u, d)) = demands.iter().enumerate().find(|(_, &d)| d >= files) {
            return Err(Error::InvalidParams(format!(
                "user {} requests file {} but only {files} files exist",
                u + 1,
                d + 1
            )));
        }
        Ok(Self(demands))
    }

    pub(crate) fn from_raw(demands: Vec<usize>) -> Self {
        Self(demands)
    }

    /// The `index`-th vector of `[files]^users` in lexicographic order.
    pub fn nth(index: u128, users: usize, files: usize) -> Self {
        let mut rest = index;
        let mut demands = vec![0; users];
        for d in demands.iter_mut().rev() {
            *d = (rest % files as u128) as usize;
            rest /= files as u128;
        }
        Self(demands)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn file_of(&self, user: usize) -> usize {
        self.0[user]
    }
}
