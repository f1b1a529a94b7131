//! Brownian and geometric Brownian states at the exercise dates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{RandomStream, SeedCoordinates, GENERATOR_METHOD};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("exercise grid needs at least one date")]
    Empty,
    #[error("exercise date {index} is {value}; dates must be finite and positive")]
    NonPositive { index: usize, value: f64 },
    #[error("exercise dates must be strictly increasing (t[{index}] = {value} does not exceed its predecessor)")]
    NotIncreasing { index: usize, value: f64 },
    #[error("initial state {given} does not match the {process:?} process, which starts at {expected}")]
    InitialState { process: ProcessKind, given: f64, expected: f64 },
}

/// Exercise dates `t_1 < ... < t_m` (with implicit `t_0 = 0`) and the fixed `S(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExerciseGrid {
    times: Vec<f64>,
    t0_state: f64,
}

impl ExerciseGrid {
    pub fn new(times: Vec<f64>, t0_state: f64) -> Result<Self, GridError> {
        if times.is_empty() {
            return Err(GridError::Empty);
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t > 0.0) || !t.is_finite() {
                return Err(GridError::NonPositive { index: i, value: t });
            }
            if i > 0 && t <= times[i - 1] {
                return Err(GridError::NotIncreasing { index: i, value: t });
            }
        }
        Ok(ExerciseGrid { times, t0_state })
    }

    /// Grid with the initial state the process prescribes.
    pub fn for_process(process: ProcessKind, times: Vec<f64>) -> Result<Self, GridError> {
        Self::new(times, process.initial_state())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of exercise dates `m`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_n` for `n = 0..=m`, with `t_0 = 0`.
    pub fn time(&self, n: usize) -> f64 {
        if n == 0 {
            0.0
        } else {
            self.times[n - 1]
        }
    }

    pub fn t0_state(&self) -> f64 {
        self.t0_state
    }

    /// Largest ratio `t_{n+1} / t_n` over consecutive exercise dates (1 for a single date).
    pub fn max_ratio(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] / w[0]).fold(1.0, f64::max)
    }

    fn check_grid(&self) -> Result<(), GridError> {
        Self::new(self.times.clone(), self.t0_state).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// `S(t) = W(t)`.
    StandardBrownian,
    /// `S(t) = exp(W(t) - t/2)`.
    DriftAdjustedGeometricBrownian,
}

impl ProcessKind {
    pub fn initial_state(self) -> f64 {
        match self {
            ProcessKind::StandardBrownian => 0.0,
            ProcessKind::DriftAdjustedGeometricBrownian => 1.0,
        }
    }

    #[inline]
    pub fn state_from_driver(self, w: f64, t: f64) -> f64 {
        match self {
            ProcessKind::StandardBrownian => w,
            ProcessKind::DriftAdjustedGeometricBrownian => (w - 0.5 * t).exp(),
        }
    }
}

/// Row generator: row `i` of every batch with the same seed is the same path.
#[derive(Debug, Clone)]
pub struct PathSampler {
    process: ProcessKind,
    times: Vec<f64>,
    sqrt_steps: Vec<f64>,
    stream: RandomStream,
}

impl PathSampler {
    pub fn new(process: ProcessKind, grid: &ExerciseGrid, seed: &SeedCoordinates) -> Result<Self, GridError> {
        grid.check_grid()?;
        let expected = process.initial_state();
        if grid.t0_state() != expected {
            return Err(GridError::InitialState { process, given: grid.t0_state(), expected });
        }
        let mut prev = 0.0;
        let sqrt_steps = grid
            .times()
            .iter()
            .map(|&t| {
                let dt = t - prev;
                prev = t;
                dt.sqrt()
            })
            .collect();
        Ok(PathSampler { process, times: grid.times().to_vec(), sqrt_steps, stream: seed.stream() })
    }

    pub fn dates(&self) -> usize {
        self.times.len()
    }

    /// Fill `out` (one entry per date) with row `row`.
    #[inline]
    pub fn fill_row(&self, row: u64, out: &mut [f64]) {
        let mut s = self.stream.substream(row);
        let mut w = 0.0;
        for ((o, &dt_sqrt), &t) in out.iter_mut().zip(&self.sqrt_steps).zip(&self.times) {
            w += dt_sqrt * s.next_normal();
            *o = self.process.state_from_driver(w, t);
        }
    }
}

/// `N x m` matrix of states with the metadata needed to regenerate it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBatch {
    pub process: ProcessKind,
    pub grid: ExerciseGrid,
    pub seed: SeedCoordinates,
    pub method: &'static str,
    n_paths: usize,
    states: Vec<f64>,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn dates(&self) -> usize {
        self.grid.len()
    }

    /// States of path `i` at `t_1..t_m`.
    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.dates();
        &self.states[i * m..(i + 1) * m]
    }

    /// `S^{(i)}(t_n)` for `n` in `1..=m`.
    pub fn state(&self, i: usize, n: usize) -> f64 {
        self.states[i * self.dates() + n - 1]
    }

    /// All states at date `n` (1-based).
    pub fn column(&self, n: usize) -> Vec<f64> {
        (0..self.n_paths).map(|i| self.state(i, n)).collect()
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }
}

/// Simulate `n_paths` independent rows at the grid dates.
pub fn sample_paths(
    process: ProcessKind,
    grid: &ExerciseGrid,
    n_paths: usize,
    seed: &SeedCoordinates,
) -> Result<PathBatch, GridError> {
    sample_paths_chunked(process, grid, n_paths, seed, 1)
}

/// Same output as [`sample_paths`], generated in `chunks` parallel pieces.
pub fn sample_paths_chunked(
    process: ProcessKind,
    grid: &ExerciseGrid,
    n_paths: usize,
    seed: &SeedCoordinates,
    chunks: usize,
) -> Result<PathBatch, GridError> {
    let sampler = PathSampler::new(process, grid, seed)?;
    let m = grid.len();
    let mut states = vec![0.0; n_paths * m];
    if n_paths > 0 {
        let rows_per_chunk = n_paths.div_ceil(chunks.max(1));
        states.par_chunks_mut(rows_per_chunk * m).enumerate().for_each(|(c, block)| {
            let first = c * rows_per_chunk;
            for (r, row) in block.chunks_mut(m).enumerate() {
                sampler.fill_row((first + r) as u64, row);
            }
        });
    }
    Ok(PathBatch {
        process,
        grid: grid.clone(),
        seed: seed.clone(),
        method: GENERATOR_METHOD,
        n_paths,
        states,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(times: &[f64], p: ProcessKind) -> ExerciseGrid {
        ExerciseGrid::for_process(p, times.to_vec()).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert_eq!(ExerciseGrid::new(vec![], 0.0), Err(GridError::Empty));
        assert!(matches!(ExerciseGrid::new(vec![0.0, 1.0], 0.0), Err(GridError::NonPositive { index: 0, .. })));
        assert!(matches!(ExerciseGrid::new(vec![1.0, 1.0], 0.0), Err(GridError::NotIncreasing { index: 1, .. })));
        assert!(matches!(ExerciseGrid::new(vec![1.0, f64::NAN], 0.0), Err(GridError::NonPositive { index: 1, .. })));
        let g = grid(&[0.5, 1.0, 2.0], ProcessKind::StandardBrownian);
        assert_eq!(g.time(0), 0.0);
        assert_eq!(g.time(3), 2.0);
        assert_eq!(g.max_ratio(), 2.0);
    }

    #[test]
    fn initial_state_must_match_process() {
        let g = ExerciseGrid::new(vec![1.0], 0.0).unwrap();
        let seed = SeedCoordinates::new(1, vec![]);
        let r = sample_paths(ProcessKind::DriftAdjustedGeometricBrownian, &g, 3, &seed);
        assert!(matches!(r, Err(GridError::InitialState { .. })));
    }

    #[test]
    fn empty_batch() {
        let g = grid(&[1.0], ProcessKind::StandardBrownian);
        let b = sample_paths(ProcessKind::StandardBrownian, &g, 0, &SeedCoordinates::new(3, vec![1])).unwrap();
        assert_eq!(b.n_paths(), 0);
        assert!(b.states().is_empty());
    }

    #[test]
    fn reproducible_and_chunk_independent() {
        let p = ProcessKind::DriftAdjustedGeometricBrownian;
        let g = grid(&[0.25, 0.5, 1.0], p);
        let seed = SeedCoordinates::new(99, vec![4, 5]);
        let a = sample_paths(p, &g, 1001, &seed).unwrap();
        let b = sample_paths(p, &g, 1001, &seed).unwrap();
        assert_eq!(a, b);
        for chunks in [2, 3, 7, 1001, 5000] {
            let c = sample_paths_chunked(p, &g, 1001, &seed, chunks).unwrap();
            assert_eq!(a.states(), c.states(), "chunks = {chunks}");
        }
        assert!(a.states().iter().all(|&s| s > 0.0));
        // a prefix of a larger batch is the smaller batch
        let big = sample_paths(p, &g, 2000, &seed).unwrap();
        assert_eq!(&big.states()[..a.states().len()], a.states());
    }

    #[test]
    fn geometric_states_exponentiate_brownian_states() {
        let seed = SeedCoordinates::new(5, vec![]);
        let times = [0.5, 1.5];
        let w = sample_paths(ProcessKind::StandardBrownian, &grid(&times, ProcessKind::StandardBrownian), 50, &seed)
            .unwrap();
        let p = ProcessKind::DriftAdjustedGeometricBrownian;
        let s = sample_paths(p, &grid(&times, p), 50, &seed).unwrap();
        for i in 0..50 {
            for n in 1..=2 {
                let t = times[n - 1];
                assert_eq!(s.state(i, n), (w.state(i, n) - 0.5 * t).exp());
            }
        }
    }
}
