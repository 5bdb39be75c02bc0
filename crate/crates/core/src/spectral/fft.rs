//! Cubic 3D complex FFTs built from rustfft line transforms.
//!
//! Data is row-major `[x][y][z]` with `z` contiguous. Every pass can be
//! restricted to the lines whose two transverse indices lie below given
//! limits, which is what the zero-padded convolution needs: the forward
//! transform of a field occupying the low octant skips the all-zero lines, and
//! the inverse only finishes the lines that land in the low octant.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    fn plan(&self, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    /// Unnormalized full transform.
    pub(crate) fn process(&self, data: &mut [Complex64], dir: Direction) {
        let m = self.m;
        match dir {
            Direction::Forward => {
                self.pass_z(data, m, m, dir);
                self.pass_y(data, m, m, dir);
                self.pass_x(data, m, m, dir);
            }
            Direction::Inverse => {
                self.pass_x(data, m, m, dir);
                self.pass_y(data, m, m, dir);
                self.pass_z(data, m, m, dir);
            }
        }
    }

    /// Forward transform of data supported on `[0, r)^3`.
    pub(crate) fn forward_from_octant(&self, data: &mut [Complex64], r: usize) {
        let m = self.m;
        self.pass_z(data, r, r, Direction::Forward);
        self.pass_y(data, r, m, Direction::Forward);
        self.pass_x(data, m, m, Direction::Forward);
    }

    /// Inverse transform that is only correct on `[0, r)^3`.
    pub(crate) fn inverse_to_octant(&self, data: &mut [Complex64], r: usize) {
        let m = self.m;
        self.pass_x(data, m, m, Direction::Inverse);
        self.pass_y(data, r, m, Direction::Inverse);
        self.pass_z(data, r, r, Direction::Inverse);
    }

    /// Lines along z for `x < lim_x`, `y < lim_y`.
    fn pass_z(&self, data: &mut [Complex64], lim_x: usize, lim_y: usize, dir: Direction) {
        let m = self.m;
        let plan = self.plan(dir);
        data.par_chunks_mut(m * m).take(lim_x).for_each(|slab| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(&mut slab[..lim_y * m], &mut scratch);
        });
    }

    /// Lines along y for `x < lim_x`, `z < lim_z`.
    fn pass_y(&self, data: &mut [Complex64], lim_x: usize, lim_z: usize, dir: Direction) {
        let m = self.m;
        let plan = self.plan(dir);
        data.par_chunks_mut(m * m).take(lim_x).for_each(|slab| {
            let mut lines = vec![Complex64::default(); lim_z * m];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            for y in 0..m {
                let row = &slab[y * m..y * m + lim_z];
                for (z, &c) in row.iter().enumerate() {
                    lines[z * m + y] = c;
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for y in 0..m {
                let row = &mut slab[y * m..y * m + lim_z];
                for (z, c) in row.iter_mut().enumerate() {
                    *c = lines[z * m + y];
                }
            }
        });
    }

    /// Lines along x for `y < lim_y`, `z < lim_z`.
    fn pass_x(&self, data: &mut [Complex64], lim_y: usize, lim_z: usize, dir: Direction) {
        let m = self.m;
        let plan = self.plan(dir);
        let mut lines = vec![Complex64::default(); lim_y * lim_z * m];
        {
            let src: &[Complex64] = data;
            lines.par_chunks_mut(lim_z * m).enumerate().for_each(|(y, block)| {
                for x in 0..m {
                    let row = &src[(x * m + y) * m..(x * m + y) * m + lim_z];
                    for (z, &c) in row.iter().enumerate() {
                        block[z * m + x] = c;
                    }
                }
            });
        }
        lines.par_chunks_mut(lim_z * m).for_each(|block| {
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            plan.process_with_scratch(block, &mut scratch);
        });
        data.par_chunks_mut(m * m).enumerate().for_each(|(x, slab)| {
            for y in 0..lim_y {
                let block = &lines[y * lim_z * m..(y + 1) * lim_z * m];
                let row = &mut slab[y * m..y * m + lim_z];
                for (z, c) in row.iter_mut().enumerate() {
                    *c = block[z * m + x];
                }
            }
        });
    }
}
