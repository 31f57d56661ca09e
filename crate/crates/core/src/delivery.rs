//! XOR delivery schedules and their coverage check.
//!
//! A schedule depends only on the placement; a demand vector decides which
//! file each term reads from when the equations are actually transmitted.

use std::fmt;

use itertools::Itertools;

use crate::design::{BlockId, ResolvableDesign};
use crate::scheme::{subset_index, CachingScheme, SchemeKind, SchemeSource};
use crate::{Error, Rational, Result};

/// One summand of an equation: subfile `subfile` of the file `user` requests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Term {
    pub user: usize,
    pub subfile: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XorEquation {
    pub terms: Vec<Term>,
}

impl XorEquation {
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        self.terms.iter().map(|t| t.user)
    }

    /// Renders the equation as `W_{d_12,3} ⊕ W_{d_13,2} ⊕ ...`.
    pub fn display<'a>(&'a self, scheme: &'a CachingScheme) -> impl fmt::Display + 'a {
        EquationDisplay {
            eq: self,
            scheme,
        }
    }
}

struct EquationDisplay<'a> {
    eq: &'a XorEquation,
    scheme: &'a CachingScheme,
}

impl fmt::Display for EquationDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let users = self.scheme.user_labels();
        let subfiles = self.scheme.subfile_labels();
        let rendered = self
            .eq
            .terms
            .iter()
            .map(|t| format!("W_{{d_{},{}}}", users[t.user], subfiles[t.subfile]))
            .join(" ⊕ ");
        f.write_str(&rendered)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliverySchedule {
    kind: SchemeKind,
    users: usize,
    subpacketization: usize,
    equations: Vec<XorEquation>,
}

impl DeliverySchedule {
    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn equations(&self) -> &[XorEquation] {
        &self.equations
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Equations times subfile size, in files.
    pub fn rate(&self) -> Rational {
        Rational::new(self.equations.len() as u64, self.subpacketization as u64)
    }

    /// For each user, `(equation index, term index)` of every term it decodes.
    pub fn participation(&self) -> Vec<Vec<(usize, usize)>> {
        let mut by_user = vec![Vec::new(); self.users];
        for (e, eq) in self.equations.iter().enumerate() {
            for (i, term) in eq.terms.iter().enumerate() {
                by_user[term.user].push((e, i));
            }
        }
        by_user
    }

    pub fn render(&self, scheme: &CachingScheme) -> String {
        self.equations
            .iter()
            .map(|eq| format!("{}\n", eq.display(scheme)))
            .collect()
    }
}

/// Delivery for the SPC scheme.
///
/// Every label tuple `(l_1..l_k)` whose blocks share no point gets one
/// equation; that happens exactly when `l_1 + ... + l_{k-1} != l_k (mod q)`.
/// Term `α` carries the point common to all chosen blocks except class `α`.
pub fn schedule_proposed(
    scheme: &CachingScheme,
    design: &ResolvableDesign,
) -> Result<DeliverySchedule> {
    let params = match scheme.source() {
        SchemeSource::Proposed(p) if p == design.params() => p,
        SchemeSource::Proposed(p) => {
            return Err(Error::Inconsistent(format!(
                "scheme built for q={} k={} but design has q={} k={}",
                p.q(),
                p.k(),
                design.params().q(),
                design.params().k()
            )))
        }
        SchemeSource::Mn { .. } => {
            return Err(Error::Inconsistent(
                "schedule_proposed needs a proposed scheme".into(),
            ))
        }
    };
    let (q, k) = (params.q(), params.k());

    let mut equations = Vec::with_capacity(params.subpacketization() * (q - 1));
    let mut picks = Vec::with_capacity(k - 1);
    for labels in (0..k).map(|_| 0..q).multi_cartesian_product() {
        let prefix = labels[..k - 1].iter().sum::<usize>() % q;
        if prefix == labels[k - 1] {
            continue;
        }
        let mut terms = Vec::with_capacity(k);
        for alpha in 0..k {
            picks.clear();
            picks.extend(
                (0..k)
                    .filter(|&i| i != alpha)
                    .map(|i| BlockId::new(i, labels[i])),
            );
            let subfile = design.intersect_point(&picks)?;
            terms.push(Term {
                user: alpha * q + labels[alpha],
                subfile,
            });
        }
        equations.push(XorEquation { terms });
    }

    Ok(DeliverySchedule {
        kind: SchemeKind::Proposed,
        users: scheme.users(),
        subpacketization: scheme.subpacketization(),
        equations,
    })
}

/// MN delivery: for each `(t+1)`-subset `S`, XOR the subfiles `S \ {u}` of
/// every `u ∈ S`.
pub fn schedule_mn(scheme: &CachingScheme) -> Result<DeliverySchedule> {
    let (users, t) = match scheme.source() {
        SchemeSource::Mn { users, t } => (users, t),
        SchemeSource::Proposed(_) => {
            return Err(Error::Inconsistent("schedule_mn needs an MN scheme".into()))
        }
    };
    let index = subset_index(scheme);
    let mut rest = Vec::with_capacity(t);
    let equations = (0..users)
        .combinations(t + 1)
        .map(|s| {
            let terms = s
                .iter()
                .map(|&u| {
                    rest.clear();
                    rest.extend(s.iter().copied().filter(|&v| v != u));
                    Term {
                        user: u,
                        subfile: index[rest.as_slice()],
                    }
                })
                .collect();
            XorEquation { terms }
        })
        .collect();
    Ok(DeliverySchedule {
        kind: SchemeKind::Mn,
        users,
        subpacketization: scheme.subpacketization(),
        equations,
    })
}

pub fn schedule_for(
    scheme: &CachingScheme,
    design: Option<&ResolvableDesign>,
) -> Result<DeliverySchedule> {
    match (scheme.kind(), design) {
        (SchemeKind::Mn, _) => schedule_mn(scheme),
        (SchemeKind::Proposed, Some(d)) => schedule_proposed(scheme, d),
        (SchemeKind::Proposed, None) => Err(Error::Inconsistent(
            "proposed scheme needs its design to schedule delivery".into(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCoverage {
    pub participations: usize,
    /// Sorted subfiles this user decodes from the schedule.
    pub recovered: Vec<usize>,
    /// Recovered set is exactly the complement of the cached set.
    pub complement: bool,
    /// No subfile is delivered to this user twice.
    pub distinct: bool,
    /// Participation count equals the number of missing subfiles,
    /// `q^(k-1) - q^(k-2)` for the proposed scheme.
    pub count_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub users: Vec<UserCoverage>,
    /// Equations where some term is cached by its own user or missing from
    /// another participant's cache, as `(equation, term)` pairs.
    pub undecodable_terms: Vec<(usize, usize)>,
}

impl CoverageReport {
    pub fn all_ok(&self) -> bool {
        self.undecodable_terms.is_empty()
            && self
                .users
                .iter()
                .all(|u| u.complement && u.distinct && u.count_matches)
    }
}

/// Tallies what each user can decode from `schedule`. Violations are
/// reported, never raised.
pub fn verify_schedule(scheme: &CachingScheme, schedule: &DeliverySchedule) -> CoverageReport {
    let users = scheme.users();
    let mut recovered: Vec<Vec<usize>> = vec![Vec::new(); users];
    let mut undecodable_terms = Vec::new();

    for (e, eq) in schedule.equations().iter().enumerate() {
        for (i, term) in eq.terms.iter().enumerate() {
            let needs_it = term.user < users && !scheme.caches(term.user, term.subfile);
            let others_have_it = eq
                .terms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .all(|(_, other)| scheme.caches(term.user, other.subfile));
            if needs_it && others_have_it {
                recovered[term.user].push(term.subfile);
            } else {
                undecodable_terms.push((e, i));
            }
        }
    }

    let users = recovered
        .into_iter()
        .enumerate()
        .map(|(u, got)| {
            let participations = got.len();
            let mut sorted = got;
            sorted.sort_unstable();
            let before = sorted.len();
            sorted.dedup();
            let distinct = before == sorted.len();
            let missing: Vec<usize> = scheme
                .placement_row(u)
                .iter()
                .positions(|&c| !c)
                .collect();
            UserCoverage {
                participations,
                complement: sorted == missing,
                distinct,
                count_matches: participations == missing.len(),
                recovered: sorted,
            }
        })
        .collect();

    CoverageReport {
        users,
        undecodable_terms,
    }
}
