//! Internals of the master-equation integrator.
//!
//! The Jaynes-Cummings coupling conserves the total excitation number and the
//! decay jump lowers it by one on both sides of the density matrix, so the
//! Liouvillian never mixes matrix blocks with different row/column excitation
//! offsets. The state is therefore stored as a set of "bands": band `k` holds
//! the blocks `rho[sector c+k, sector c]`, and only bands that are nonzero in
//! the initial state are ever touched. Diagonal-in-excitation initial states
//! (every thermal product state) reduce to band 0, which cuts both memory and
//! arithmetic by roughly the square of the sector count. Band `-k` is the
//! adjoint of band `k` and is never stored.
//!
//! Within a band the right-hand side is applied blockwise with per-sector
//! sparse Hamiltonians, a jump ladder that pulls from the next block up, and
//! a diagonal anticommutator. Classical RK4 with a fixed step does the rest.

use num_complex::Complex64;

use crate::linalg::Matrix;
use crate::{Error, Result};

/// Partition of the basis indices of a space by total excitation number.
pub(crate) struct Grading {
    /// sector -> ascending full-space indices.
    pub sectors: Vec<Vec<u32>>,
    /// full-space index -> (sector, position within sector).
    pub locate: Vec<(u32, u32)>,
}

impl Grading {
    pub fn new(dim: usize, excitation_of: impl Fn(usize) -> usize) -> Self {
        let max_exc = (0..dim).map(&excitation_of).max().unwrap_or(0);
        let mut sectors = vec![Vec::new(); max_exc + 1];
        for idx in 0..dim {
            sectors[excitation_of(idx)].push(idx as u32);
        }
        let mut locate = vec![(0u32, 0u32); dim];
        for (s, members) in sectors.iter().enumerate() {
            for (pos, &idx) in members.iter().enumerate() {
                locate[idx as usize] = (s as u32, pos as u32);
            }
        }
        Self { sectors, locate }
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(Vec::len).collect()
    }
}

/// CSR matrix restricted to one sector.
pub(crate) struct SectorOp {
    pub row_ptr: Vec<u32>,
    pub entries: Vec<(u32, Complex64)>,
}

impl SectorOp {
    #[inline]
    fn row(&self, i: usize) -> &[(u32, Complex64)] {
        &self.entries[self.row_ptr[i] as usize..self.row_ptr[i + 1] as usize]
    }
}

/// Split a dense excitation-conserving operator into per-sector CSR blocks,
/// scaling every entry by `scale`. Errors if the operator couples different
/// sectors.
pub(crate) fn split_into_sectors(
    dense: &Matrix,
    grading: &Grading,
    scale: Complex64,
) -> Result<Vec<SectorOp>> {
    let mut out = Vec::with_capacity(grading.sector_count());
    for members in &grading.sectors {
        let mut row_ptr = Vec::with_capacity(members.len() + 1);
        let mut entries = Vec::new();
        row_ptr.push(0u32);
        for &u in members {
            let row = dense.row(u as usize);
            for (v, &value) in row.iter().enumerate() {
                if value == Complex64::ZERO {
                    continue;
                }
                let (sv, pv) = grading.locate[v];
                if grading.locate[u as usize].0 != sv {
                    return Err(Error::Config(format!(
                        "operator couples excitation sectors {} and {sv}",
                        grading.locate[u as usize].0
                    )));
                }
                entries.push((pv, value * scale));
            }
            row_ptr.push(entries.len() as u32);
        }
        out.push(SectorOp { row_ptr, entries });
    }
    Ok(out)
}

/// The dissipation channel: a lowering ladder between adjacent sectors.
pub(crate) struct JumpLadder {
    pub rate: f64,
    /// per sector `s`: (destination position in `s`, source position in
    /// `s + 1`, amplitude). Each source appears at most once.
    pub pairs: Vec<Vec<(u32, u32, f64)>>,
    /// per sector: diagonal of `L^dag L`.
    pub pdiag: Vec<Vec<f64>>,
}

/// Block-band storage layout for a banded density matrix.
pub(crate) struct BandLayout {
    pub sector_dims: Vec<usize>,
    /// Band offsets `k >= 0`, ascending; band 0 is always present.
    pub bands: Vec<usize>,
    /// blocks[band][c] = (data offset, rows, cols) for block
    /// `rho[sector c+k, sector c]`.
    pub blocks: Vec<Vec<(usize, usize, usize)>>,
    pub len: usize,
}

impl BandLayout {
    pub fn new(sector_dims: Vec<usize>, bands: Vec<usize>) -> Self {
        debug_assert!(bands.first() == Some(&0));
        let mut blocks = Vec::with_capacity(bands.len());
        let mut offset = 0usize;
        let s = sector_dims.len();
        for &k in &bands {
            let mut band_blocks = Vec::with_capacity(s - k);
            for c in 0..s - k {
                let rows = sector_dims[c + k];
                let cols = sector_dims[c];
                band_blocks.push((offset, rows, cols));
                offset += rows * cols;
            }
            blocks.push(band_blocks);
        }
        Self { sector_dims, bands, blocks, len: offset }
    }

    pub fn band_zero_only(&self) -> bool {
        self.bands.len() == 1
    }
}

/// Scatter a dense matrix into banded storage. The caller guarantees the
/// matrix is Hermitian; bands below the diagonal are implied.
pub(crate) fn scatter(dense: &Matrix, grading: &Grading, layout: &BandLayout) -> Vec<Complex64> {
    let mut data = vec![Complex64::ZERO; layout.len];
    for (band_idx, &k) in layout.bands.iter().enumerate() {
        for (c, &(offset, rows, cols)) in layout.blocks[band_idx].iter().enumerate() {
            let row_sector = &grading.sectors[c + k];
            let col_sector = &grading.sectors[c];
            for i in 0..rows {
                for j in 0..cols {
                    data[offset + i * cols + j] =
                        dense.get(row_sector[i] as usize, col_sector[j] as usize);
                }
            }
        }
    }
    data
}

/// Which bands of a Hermitian matrix carry any weight at all.
pub(crate) fn detect_bands(dense: &Matrix, grading: &Grading) -> Vec<usize> {
    let mut present = vec![false; grading.sector_count()];
    present[0] = true;
    let n = dense.rows();
    for u in 0..n {
        let su = grading.locate[u].0 as i64;
        for v in 0..n {
            if dense.get(u, v) != Complex64::ZERO {
                let k = su - grading.locate[v].0 as i64;
                if k > 0 {
                    present[k as usize] = true;
                }
            }
        }
    }
    (0..grading.sector_count()).filter(|&k| present[k]).collect()
}

/// Rebuild the dense matrix from banded storage.
pub(crate) fn gather(data: &[Complex64], grading: &Grading, layout: &BandLayout) -> Matrix {
    let dim: usize = layout.sector_dims.iter().sum();
    let mut dense = Matrix::zeros(dim, dim);
    for (band_idx, &k) in layout.bands.iter().enumerate() {
        for (c, &(offset, rows, cols)) in layout.blocks[band_idx].iter().enumerate() {
            let row_sector = &grading.sectors[c + k];
            let col_sector = &grading.sectors[c];
            for i in 0..rows {
                for j in 0..cols {
                    let value = data[offset + i * cols + j];
                    let u = row_sector[i] as usize;
                    let v = col_sector[j] as usize;
                    dense.set(u, v, value);
                    if k > 0 {
                        dense.set(v, u, value.conj());
                    }
                }
            }
        }
    }
    dense
}

/// `out = -i [H, rho] + rate (L rho L^dag - 1/2 {L^dag L, rho})`, blockwise,
/// where `h_scaled` already holds `-i H` per sector. `work` is scratch for
/// one block product.
pub(crate) fn rhs(
    layout: &BandLayout,
    h_scaled: &[SectorOp],
    jump: &JumpLadder,
    y: &[Complex64],
    out: &mut [Complex64],
    work: &mut Vec<Complex64>,
) {
    out.fill(Complex64::ZERO);
    let rate = jump.rate;
    let half_rate = 0.5 * rate;

    for (band_idx, &k) in layout.bands.iter().enumerate() {
        let band_blocks = &layout.blocks[band_idx];
        for (c, &(offset, rows, cols)) in band_blocks.iter().enumerate() {
            let r = c + k;
            let block = &y[offset..offset + rows * cols];
            // Split borrow: `out` block is written, `y` is only read.
            let target = &mut out[offset..offset + rows * cols];
            let hr = &h_scaled[r];
            let hc = &h_scaled[c];

            if k == 0 {
                // Hermitian block: -i[H, B] = P + P^dag with P = (-i H) B,
                // so one product serves both sides. Only the upper triangle
                // is assembled; the mirror pass below completes it.
                work.clear();
                work.resize(rows * cols, Complex64::ZERO);
                for i in 0..rows {
                    let product_row = &mut work[i * cols..(i + 1) * cols];
                    for &(l, h) in hr.row(i) {
                        let src = &block[l as usize * cols..(l as usize + 1) * cols];
                        for (t, &b) in product_row.iter_mut().zip(src) {
                            *t += h * b;
                        }
                    }
                }
                for i in 0..rows {
                    for j in i..cols {
                        target[i * cols + j] = work[i * cols + j] + work[j * cols + i].conj();
                    }
                }
            } else {
                // Left action: out[i, :] += (-i H_r)[i, l] * B[l, :].
                for i in 0..rows {
                    let target_row = &mut target[i * cols..(i + 1) * cols];
                    for &(l, h) in hr.row(i) {
                        let src = &block[l as usize * cols..(l as usize + 1) * cols];
                        for (t, &b) in target_row.iter_mut().zip(src) {
                            *t += h * b;
                        }
                    }
                }
                // Right action: out[i, j] -= B[i, l] * (-i H_c)[l, j].
                for i in 0..rows {
                    let src_row = &block[i * cols..(i + 1) * cols];
                    let target_row = &mut target[i * cols..(i + 1) * cols];
                    for (l, &b) in src_row.iter().enumerate() {
                        if b == Complex64::ZERO {
                            continue;
                        }
                        for &(j, h) in hc.row(l) {
                            target_row[j as usize] -= b * h;
                        }
                    }
                }
            }

            // Anticommutator with the diagonal L^dag L.
            let pr = &jump.pdiag[r];
            let pc = &jump.pdiag[c];
            for i in 0..rows {
                let lo = if k == 0 { i } else { 0 };
                let pi = pr[i];
                let target_row = &mut target[i * cols + lo..(i + 1) * cols];
                let src_row = &block[i * cols + lo..(i + 1) * cols];
                for ((t, &b), &pj) in target_row.iter_mut().zip(src_row).zip(&pc[lo..]) {
                    *t -= half_rate * (pi + pj) * b;
                }
            }
        }

        // Jump feed: block c gains from block c+1 of the same band.
        for c in 0..band_blocks.len().saturating_sub(1) {
            let (offset, _rows, cols) = band_blocks[c];
            let (src_offset, _src_rows, src_cols) = band_blocks[c + 1];
            let r = c + k;
            let src = &y[src_offset..];
            for &(dst_r, src_r, amp_r) in &jump.pairs[r] {
                let weight_base = rate * amp_r;
                let src_row = &src[src_r as usize * src_cols..(src_r as usize + 1) * src_cols];
                let target_row = &mut out[offset + dst_r as usize * cols
                    ..offset + (dst_r as usize + 1) * cols];
                for &(dst_c, src_c, amp_c) in &jump.pairs[c] {
                    if k == 0 && dst_c < dst_r {
                        // Mirrored from the (dst_c, dst_r) entry.
                        continue;
                    }
                    target_row[dst_c as usize] +=
                        weight_base * amp_c * src_row[src_c as usize];
                }
            }
        }

        // Mirror the diagonal blocks: lower triangle = conj(upper).
        if k == 0 {
            for &(offset, rows, cols) in band_blocks {
                let block = &mut out[offset..offset + rows * cols];
                for i in 0..rows {
                    for j in (i + 1)..cols {
                        block[j * cols + i] = block[i * cols + j].conj();
                    }
                }
            }
        }
    }
}

/// One classical RK4 step of the banded state; `scratch` provides five
/// work buffers of the same length as `y` plus a block-product buffer.
#[allow(clippy::too_many_arguments)]
pub(crate) fn rk4_step(
    layout: &BandLayout,
    h_scaled: &[SectorOp],
    jump: &JumpLadder,
    dt: f64,
    y: &mut [Complex64],
    scratch: &mut Scratch,
) {
    let Scratch { stages: [k1, k2, k3, k4, tmp], work } = scratch;

    rhs(layout, h_scaled, jump, y, k1, work);
    write_stage(tmp, y, k1, 0.5 * dt);
    rhs(layout, h_scaled, jump, tmp, k2, work);
    write_stage(tmp, y, k2, 0.5 * dt);
    rhs(layout, h_scaled, jump, tmp, k3, work);
    write_stage(tmp, y, k3, dt);
    rhs(layout, h_scaled, jump, tmp, k4, work);

    let sixth = dt / 6.0;
    for i in 0..y.len() {
        y[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }

    hermitize_band_zero(layout, y);
}

/// Work buffers for [`rk4_step`].
pub(crate) struct Scratch {
    stages: [Vec<Complex64>; 5],
    work: Vec<Complex64>,
}

impl Scratch {
    pub fn new(len: usize) -> Self {
        Self { stages: std::array::from_fn(|_| vec![Complex64::ZERO; len]), work: Vec::new() }
    }
}

#[inline]
fn write_stage(tmp: &mut [Complex64], y: &[Complex64], k: &[Complex64], factor: f64) {
    for ((t, &a), &b) in tmp.iter_mut().zip(y).zip(k) {
        *t = a + factor * b;
    }
}

/// `(B + B^dag) / 2` on the diagonal-band blocks; off-diagonal bands are
/// Hermitian by construction (the adjoint band is implied, never stored).
pub(crate) fn hermitize_band_zero(layout: &BandLayout, y: &mut [Complex64]) {
    for &(offset, rows, cols) in &layout.blocks[0] {
        debug_assert_eq!(rows, cols);
        let block = &mut y[offset..offset + rows * cols];
        for i in 0..rows {
            for j in i..cols {
                let a = block[i * cols + j];
                let b = block[j * cols + i];
                let avg = (a + b.conj()) * 0.5;
                block[i * cols + j] = avg;
                block[j * cols + i] = avg.conj();
            }
        }
    }
}

/// Trace of the banded state (band 0 diagonal).
pub(crate) fn trace(layout: &BandLayout, y: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for &(offset, rows, cols) in &layout.blocks[0] {
        for i in 0..rows {
            acc += y[offset + i * cols + i];
        }
    }
    acc
}

/// Worst Hermiticity defect across the band-0 blocks.
pub(crate) fn hermiticity_defect(layout: &BandLayout, y: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    for &(offset, rows, cols) in &layout.blocks[0] {
        let block = &y[offset..offset + rows * cols];
        for i in 0..rows {
            for j in i..cols {
                let d = (block[i * cols + j] - block[j * cols + i].conj()).norm();
                worst = worst.max(d);
            }
        }
    }
    worst
}

/// Smallest eigenvalue of the state. With only band 0 present the blocks are
/// decoupled and each is diagonalized alone; otherwise the dense matrix is
/// rebuilt.
pub(crate) fn min_eigenvalue(
    grading: &Grading,
    layout: &BandLayout,
    y: &[Complex64],
) -> Result<f64> {
    if layout.band_zero_only() {
        let mut min = f64::INFINITY;
        for &(offset, rows, cols) in &layout.blocks[0] {
            if rows == 0 {
                continue;
            }
            let mut block = Matrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    block.set(i, j, y[offset + i * cols + j]);
                }
            }
            let eig = crate::linalg::hermitian_eigenvalues(&block)?;
            min = min.min(eig[0]);
        }
        Ok(min)
    } else {
        let dense = gather(y, grading, layout);
        let eig = crate::linalg::hermitian_eigenvalues(&dense)?;
        Ok(eig.first().copied().unwrap_or(0.0))
    }
}
