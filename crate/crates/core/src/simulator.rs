//! Byte-level execution of placement and delivery.
//!
//! Files are split into `F_s` equal byte strings (zero padded), caches are
//! filled from the placement, every schedule equation is XOR-ed into one
//! transmission, and each user decodes from its cache plus the transmissions
//! alone.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delivery::{schedule_for, DeliverySchedule};
use crate::design::ResolvableDesign;
use crate::par::{self, Execution};
use crate::scheme::{CachingScheme, DemandVector};
use crate::{Error, Rational, Result};

/// Upper bound on demand vectors an exhaustive sweep will enumerate.
pub const MAX_EXHAUSTIVE_RUNS: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileCorpus {
    files: Vec<Vec<u8>>,
    original_len: usize,
    subfile_len: usize,
    subpacketization: usize,
    seed: u64,
}

impl FileCorpus {
    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    /// `F` before padding.
    pub fn original_len(&self) -> usize {
        self.original_len
    }

    pub fn padded_len(&self) -> usize {
        self.subfile_len * self.subpacketization
    }

    pub fn subfile_len(&self) -> usize {
        self.subfile_len
    }

    pub fn subpacketization(&self) -> usize {
        self.subpacketization
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// File `file` without padding.
    pub fn file(&self, file: usize) -> &[u8] {
        &self.files[file][..self.original_len]
    }

    pub fn subfile(&self, file: usize, subfile: usize) -> &[u8] {
        let len = self.subfile_len;
        &self.files[file][subfile * len..(subfile + 1) * len]
    }
}

/// `files` pseudorandom files of `size` bytes from `seed`, zero padded to
/// the next multiple of `subpacketization`.
pub fn make_corpus(
    files: usize,
    size: usize,
    seed: u64,
    subpacketization: usize,
) -> Result<FileCorpus> {
    if files == 0 || size == 0 || subpacketization == 0 {
        return Err(Error::InvalidParams(format!(
            "corpus needs N ≥ 1, F ≥ 1 and F_s ≥ 1 (got N={files}, F={size}, F_s={subpacketization})"
        )));
    }
    let subfile_len = size.div_ceil(subpacketization);
    let padded = subfile_len * subpacketization;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files = (0..files)
        .map(|_| {
            let mut f = vec![0u8; padded];
            rng.fill_bytes(&mut f[..size]);
            f
        })
        .collect();
    Ok(FileCorpus {
        files,
        original_len: size,
        subfile_len,
        subpacketization,
        seed,
    })
}

/// One user's cache: the same subfile indices of every file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UserCache {
    /// Slot of each subfile index, if cached.
    slots: Vec<Option<usize>>,
    cached: usize,
    subfile_len: usize,
    /// `[file][slot][byte]`.
    data: Vec<u8>,
}

impl UserCache {
    pub fn get(&self, file: usize, subfile: usize) -> Option<&[u8]> {
        let slot = self.slots[subfile]?;
        let start = (file * self.cached + slot) * self.subfile_len;
        Some(&self.data[start..start + self.subfile_len])
    }

    pub fn bytes(&self) -> usize {
        self.data.len()
    }
}

/// Fill every cache from the placement. Demand oblivious.
pub fn place(scheme: &CachingScheme, corpus: &FileCorpus) -> Result<Vec<UserCache>> {
    if scheme.subpacketization() != corpus.subpacketization() {
        return Err(Error::Inconsistent(format!(
            "scheme has F_s={} but corpus was split into {}",
            scheme.subpacketization(),
            corpus.subpacketization()
        )));
    }
    let caches = (0..scheme.users())
        .map(|u| {
            let cached = scheme.cached_subfiles(u);
            let mut slots = vec![None; scheme.subpacketization()];
            for (slot, &s) in cached.iter().enumerate() {
                slots[s] = Some(slot);
            }
            let mut data = Vec::with_capacity(corpus.file_count() * cached.len() * corpus.subfile_len);
            for n in 0..corpus.file_count() {
                for &s in &cached {
                    data.extend_from_slice(corpus.subfile(n, s));
                }
            }
            UserCache {
                slots,
                cached: cached.len(),
                subfile_len: corpus.subfile_len,
                data,
            }
        })
        .collect();
    Ok(caches)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationRun {
    pub seed: u64,
    pub demands: DemandVector,
    /// One XOR per schedule equation, in schedule order.
    pub transmissions: Vec<Vec<u8>>,
    /// Per user, its reconstruction of the requested file (unpadded), or
    /// `None` if some subfile could not be recovered.
    pub decoded: Vec<Option<Vec<u8>>>,
    pub cached_bytes: Vec<usize>,
    pub transmitted_bytes: usize,
    /// Transmitted bytes over the padded file length.
    pub measured_rate: Rational,
    /// Users whose decoded file differs from the one they requested.
    pub error_count: usize,
}

impl SimulationRun {
    pub fn transmission_hex(&self) -> Vec<String> {
        self.transmissions
            .iter()
            .map(|t| t.iter().map(|b| format!("{b:02x}")).collect())
            .collect()
    }
}

/// Which demand vectors a sweep visits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandSweep {
    /// All `N^K` vectors over the corpus files.
    Exhaustive,
    /// `count` vectors drawn uniformly from `[N]^K`.
    Random { count: usize, seed: u64 },
    Listed(Vec<DemandVector>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSummary {
    pub runs: usize,
    /// Demand vectors for which at least one user decoded wrongly.
    pub failed: Vec<DemandVector>,
    pub user_errors: usize,
    /// Distinct measured rates across runs, sorted.
    pub rates: Vec<Rational>,
    /// Every run sent the same number of transmissions with the same sizes.
    pub uniform_transmissions: bool,
    pub transmitted_bytes: usize,
}

impl SweepSummary {
    pub fn ok(&self) -> bool {
        self.failed.is_empty()
    }
}

/// Random demand vectors, reproducible from `seed`.
pub fn random_demands(users: usize, files: usize, count: usize, seed: u64) -> Vec<DemandVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| DemandVector::from_raw((0..users).map(|_| rng.gen_range(0..files)).collect()))
        .collect()
}

/// Scheme, schedule and filled caches for one corpus; runs any number of
/// demand vectors against them.
#[derive(Debug)]
pub struct Simulator<'a> {
    scheme: &'a CachingScheme,
    corpus: &'a FileCorpus,
    schedule: DeliverySchedule,
    caches: Vec<UserCache>,
    participation: Vec<Vec<(usize, usize)>>,
}

impl<'a> Simulator<'a> {
    pub fn new(
        scheme: &'a CachingScheme,
        design: Option<&ResolvableDesign>,
        corpus: &'a FileCorpus,
    ) -> Result<Self> {
        let schedule = schedule_for(scheme, design)?;
        Self::with_schedule(scheme, schedule, corpus)
    }

    pub fn with_schedule(
        scheme: &'a CachingScheme,
        schedule: DeliverySchedule,
        corpus: &'a FileCorpus,
    ) -> Result<Self> {
        let caches = place(scheme, corpus)?;
        let participation = schedule.participation();
        if participation.len() != scheme.users() {
            return Err(Error::Inconsistent(
                "schedule and scheme disagree on the user count".into(),
            ));
        }
        Ok(Self {
            scheme,
            corpus,
            schedule,
            caches,
            participation,
        })
    }

    pub fn schedule(&self) -> &DeliverySchedule {
        &self.schedule
    }

    pub fn caches(&self) -> &[UserCache] {
        &self.caches
    }

    fn check_demands(&self, demands: &DemandVector) -> Result<()> {
        if demands.len() != self.scheme.users() {
            return Err(Error::Inconsistent(format!(
                "{} demands for {} users",
                demands.len(),
                self.scheme.users()
            )));
        }
        if let Some(d) = demands.as_slice().iter().find(|&&d| d >= self.corpus.file_count()) {
            return Err(Error::Inconsistent(format!(
                "demand for file {} but corpus has {} files",
                d + 1,
                self.corpus.file_count()
            )));
        }
        Ok(())
    }

    /// Server side: XOR the named subfiles of the requested files.
    pub fn encode(&self, demands: &DemandVector) -> Vec<Vec<u8>> {
        let len = self.corpus.subfile_len();
        self.schedule
            .equations()
            .iter()
            .map(|eq| {
                let mut out = vec![0u8; len];
                for t in &eq.terms {
                    xor_into(&mut out, self.corpus.subfile(demands.file_of(t.user), t.subfile));
                }
                out
            })
            .collect()
    }

    /// User side: peel every other participant's term off each equation using
    /// only this user's cache.
    pub fn decode(
        &self,
        user: usize,
        demands: &DemandVector,
        transmissions: &[Vec<u8>],
    ) -> Option<Vec<u8>> {
        let cache = &self.caches[user];
        let wanted = demands.file_of(user);
        let fs = self.corpus.subpacketization();
        let mut parts: Vec<Option<Vec<u8>>> =
            (0..fs).map(|s| cache.get(wanted, s).map(<[u8]>::to_vec)).collect();

        for &(e, i) in &self.participation[user] {
            let eq = &self.schedule.equations()[e];
            let mut value = transmissions[e].clone();
            let mut complete = true;
            for (j, other) in eq.terms.iter().enumerate() {
                if j == i {
                    continue;
                }
                match cache.get(demands.file_of(other.user), other.subfile) {
                    Some(bytes) => xor_into(&mut value, bytes),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            let target = eq.terms[i].subfile;
            if complete && parts[target].is_none() {
                parts[target] = Some(value);
            }
        }

        let mut file = Vec::with_capacity(self.corpus.padded_len());
        for p in parts {
            file.extend_from_slice(&p?);
        }
        file.truncate(self.corpus.original_len());
        Some(file)
    }

    pub fn run(&self, demands: &DemandVector) -> Result<SimulationRun> {
        self.check_demands(demands)?;
        let transmissions = self.encode(demands);
        let decoded: Vec<Option<Vec<u8>>> = (0..self.scheme.users())
            .map(|u| self.decode(u, demands, &transmissions))
            .collect();
        let error_count = decoded
            .iter()
            .enumerate()
            .filter(|(u, d)| d.as_deref() != Some(self.corpus.file(demands.file_of(*u))))
            .count();
        let transmitted_bytes = transmissions.iter().map(Vec::len).sum::<usize>();
        Ok(SimulationRun {
            seed: self.corpus.seed(),
            demands: demands.clone(),
            measured_rate: Rational::new(
                transmitted_bytes as u64,
                self.corpus.padded_len() as u64,
            ),
            transmitted_bytes,
            cached_bytes: self.caches.iter().map(UserCache::bytes).collect(),
            transmissions,
            decoded,
            error_count,
        })
    }

    /// Demand vectors a sweep will visit, after the exhaustive-size guard.
    pub fn sweep_len(&self, sweep: &DemandSweep) -> Result<usize> {
        match sweep {
            DemandSweep::Exhaustive => {
                let runs = exhaustive_runs(self.corpus.file_count(), self.scheme.users());
                if runs > MAX_EXHAUSTIVE_RUNS {
                    return Err(Error::SweepTooLarge {
                        runs,
                        limit: MAX_EXHAUSTIVE_RUNS,
                    });
                }
                Ok(runs as usize)
            }
            DemandSweep::Random { count, .. } => Ok(*count),
            DemandSweep::Listed(v) => Ok(v.len()),
        }
    }

    pub fn sweep(&self, sweep: &DemandSweep, exec: Execution) -> Result<SweepSummary> {
        let runs = self.sweep_len(sweep)?;
        let (users, files) = (self.scheme.users(), self.corpus.file_count());
        let listed = match sweep {
            DemandSweep::Exhaustive => Vec::new(),
            DemandSweep::Random { count, seed } => random_demands(users, files, *count, *seed),
            DemandSweep::Listed(list) => list.clone(),
        };
        let demand_at = |i: usize| match sweep {
            DemandSweep::Exhaustive => DemandVector::nth(i as u128, users, files),
            _ => listed[i].clone(),
        };

        let outcomes = par::map_indices(exec, runs, |i| {
            let run = self.run(&demand_at(i))?;
            Ok(Outcome {
                errors: run.error_count,
                rate: run.measured_rate,
                sizes: run.transmissions.iter().map(Vec::len).collect(),
                bytes: run.transmitted_bytes,
            })
        });
        let outcomes: Vec<Outcome> = outcomes.into_iter().collect::<Result<_>>()?;

        let failed = outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| o.errors > 0)
            .map(|(i, _)| demand_at(i))
            .collect();
        let mut rates: Vec<Rational> = outcomes.iter().map(|o| o.rate).collect();
        rates.sort_unstable();
        rates.dedup();
        Ok(SweepSummary {
            runs,
            failed,
            user_errors: outcomes.iter().map(|o| o.errors).sum(),
            rates,
            uniform_transmissions: outcomes.windows(2).all(|w| w[0].sizes == w[1].sizes),
            transmitted_bytes: outcomes.first().map_or(0, |o| o.bytes),
        })
    }
}

struct Outcome {
    errors: usize,
    rate: Rational,
    sizes: Vec<usize>,
    bytes: usize,
}

/// `N^K`, saturating.
pub fn exhaustive_runs(files: usize, users: usize) -> u128 {
    (files as u128).checked_pow(users as u32).unwrap_or(u128::MAX)
}

fn xor_into(acc: &mut [u8], other: &[u8]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a ^= b;
    }
}

/// One-shot placement, delivery and decoding for a single demand vector.
pub fn run_simulation(
    scheme: &CachingScheme,
    design: Option<&ResolvableDesign>,
    corpus: &FileCorpus,
    demands: &DemandVector,
) -> Result<SimulationRun> {
    Simulator::new(scheme, design, corpus)?.run(demands)
}
