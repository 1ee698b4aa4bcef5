use super::density::SpaceTimeDensity;
use super::slab::{end_weights, lag_weights, slab_weights, GeomCache, Kernel, Target};
use crate::error::{invalid, Error, Result};
use crate::geometry::BoundaryMap;
use crate::quadrature::{SpaceGrid, TimeGrid};
use rayon::prelude::*;
use std::io::{Read, Write};

/// The four boundary operators pulled back to the reference circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Single layer V_φ.
    V,
    /// Partial derivative x_l of the single layer kernel, l ∈ {0, 1}.
    Vl(usize),
    /// Normal derivative of the single layer kernel at the target.
    WStar,
    /// Direct value of the double layer.
    W,
}

impl OperatorKind {
    pub(crate) fn kernel(self) -> Kernel {
        match self {
            OperatorKind::V => Kernel::Single,
            OperatorKind::Vl(l) => {
                let mut e = [0.0, 0.0];
                e[l] = 1.0;
                Kernel::Gradient(e)
            }
            OperatorKind::WStar => Kernel::NormalGradient,
            OperatorKind::W => Kernel::Double,
        }
    }

    pub fn label(self) -> String {
        match self {
            OperatorKind::V => "V".into(),
            OperatorKind::Vl(l) => format!("V_{}", l + 1),
            OperatorKind::WStar => "W_star".into(),
            OperatorKind::W => "W".into(),
        }
    }

    fn code(self) -> (u32, u32) {
        match self {
            OperatorKind::V => (0, 0),
            OperatorKind::Vl(l) => (1, l as u32),
            OperatorKind::WStar => (2, 0),
            OperatorKind::W => (3, 0),
        }
    }

    fn from_code(kind: u32, l: u32) -> Result<Self> {
        Ok(match (kind, l) {
            (0, _) => OperatorKind::V,
            (1, l @ 0..=1) => OperatorKind::Vl(l as usize),
            (2, _) => OperatorKind::WStar,
            (3, _) => OperatorKind::W,
            _ => return invalid(format!("unknown operator code {kind}/{l}")),
        })
    }
}

/// Causal, block lower-triangular, Toeplitz-in-time Nyström matrix.
///
/// The output at t_i is Σ_{k=1}^{i} B_{i−k} μ_k + A_i μ_0. The A blocks
/// only matter for densities that do not vanish at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOperatorMatrix {
    kind: OperatorKind,
    time: TimeGrid,
    space: SpaceGrid,
    shape_hash: u64,
    b: Vec<Vec<f64>>,
    a: Vec<Vec<f64>>,
}

/// Nyström assembly of the named operator on the given grids.
pub fn assemble(kind: OperatorKind, phi: &BoundaryMap, time: TimeGrid, space: SpaceGrid) -> Result<BoundaryOperatorMatrix> {
    if let OperatorKind::Vl(l) = kind {
        if l > 1 {
            return invalid("V_l needs l in {0, 1}");
        }
    }
    let n = space.len();
    let m = time.steps();
    let cache = GeomCache::new(phi, n);
    let rows: Vec<_> = (0..n)
        .into_par_iter()
        .map(|j| lag_weights(&cache, Target::Node(j), kind.kernel(), &time))
        .collect();
    let mut b = vec![vec![0.0; n * n]; m];
    let mut a = vec![vec![0.0; n * n]; m];
    for (j, w) in rows.iter().enumerate() {
        for l in 0..m {
            b[l][j * n..(j + 1) * n].copy_from_slice(&w.b[l]);
            a[l][j * n..(j + 1) * n].copy_from_slice(&w.a[l]);
        }
    }
    Ok(BoundaryOperatorMatrix { kind, time, space, shape_hash: phi.shape_hash(), b, a })
}

/// Assembles every block (i, k), 1 ≤ k ≤ i ≤ M, from absolute times instead
/// of lags. `out[i − 1][k − 1]` multiplies μ_k in the output at t_i.
pub fn assemble_direct(kind: OperatorKind, phi: &BoundaryMap, time: TimeGrid, space: SpaceGrid) -> Vec<Vec<Vec<f64>>> {
    let n = space.len();
    let m = time.steps();
    let cache = GeomCache::new(phi, n);
    let ker = kind.kernel();
    (1..=m)
        .map(|i| {
            (1..=i)
                .map(|k| {
                    let cols: Vec<Vec<f64>> = (0..n)
                        .into_par_iter()
                        .map(|j| {
                            let t = Target::Node(j);
                            let (lo, hi) = (time.node(i) - time.node(k), time.node(i) - time.node(k - 1));
                            let (w0, w1) = slab_weights(&cache, t, ker, lo, hi);
                            let (mut row, _) = end_weights(&w0, &w1, hi - lo);
                            if k < i {
                                let (lo, hi) = (time.node(i) - time.node(k + 1), time.node(i) - time.node(k));
                                let (w0, w1) = slab_weights(&cache, t, ker, lo, hi);
                                let (_, far) = end_weights(&w0, &w1, hi - lo);
                                row.iter_mut().zip(&far).for_each(|(x, y)| *x += y);
                            }
                            row
                        })
                        .collect();
                    cols.concat()
                })
                .collect()
        })
        .collect()
}

const MAGIC: &[u8; 4] = b"HLOP";
const VERSION: u32 = 1;

impl BoundaryOperatorMatrix {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }
    pub fn time(&self) -> &TimeGrid {
        &self.time
    }
    pub fn space(&self) -> &SpaceGrid {
        &self.space
    }
    pub fn shape_hash(&self) -> u64 {
        self.shape_hash
    }
    /// Lag blocks B_0..B_{M−1}, each N×N row-major.
    pub fn lag_blocks(&self) -> &[Vec<f64>] {
        &self.b
    }
    /// Initial-value blocks A_1..A_M.
    pub fn initial_blocks(&self) -> &[Vec<f64>] {
        &self.a
    }

    /// Operator applied to a density, row-major (M+1)×N. Row 0 is zero.
    pub fn apply(&self, mu: &SpaceTimeDensity) -> Result<Vec<f64>> {
        if mu.time() != &self.time || mu.space() != &self.space {
            return invalid("density grid differs from operator grid");
        }
        let n = self.space.len();
        let m = self.time.steps();
        let v = mu.values();
        let rows: Vec<Vec<f64>> = (1..=m)
            .into_par_iter()
            .map(|i| {
                let mut out = matvec(&self.a[i - 1], &v[..n], n);
                for k in 1..=i {
                    let y = matvec(&self.b[i - k], &v[k * n..(k + 1) * n], n);
                    out.iter_mut().zip(&y).for_each(|(o, x)| *o += x);
                }
                out
            })
            .collect();
        let mut out = vec![0.0; n];
        for r in rows {
            out.extend(r);
        }
        Ok(out)
    }

    /// Largest entry over all blocks.
    pub fn max_abs(&self) -> f64 {
        self.b.iter().chain(&self.a).flatten().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Writes the flat little-endian layout: magic `HLOP`, version, kind
    /// code, l, N, M (u64), T (f64), shape hash (u64), then the B blocks and
    /// the A blocks, each N×N row-major f64.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (k, l) = self.kind.code();
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&k.to_le_bytes())?;
        w.write_all(&l.to_le_bytes())?;
        w.write_all(&(self.space.len() as u64).to_le_bytes())?;
        w.write_all(&(self.time.steps() as u64).to_le_bytes())?;
        w.write_all(&self.time.t_final().to_le_bytes())?;
        w.write_all(&self.shape_hash.to_le_bytes())?;
        for v in self.b.iter().chain(&self.a).flatten() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::InvalidInput("not an operator file".into()));
        }
        let mut u4 = [0u8; 4];
        let mut u8b = [0u8; 8];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u4)?;
            Ok(u32::from_le_bytes(u4))
        };
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return invalid(format!("unsupported operator file version {version}"));
        }
        let kind = OperatorKind::from_code(read_u32(&mut r)?, read_u32(&mut r)?)?;
        let mut read_u64 = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut u8b)?;
            Ok(u8b)
        };
        let n = u64::from_le_bytes(read_u64(&mut r)?) as usize;
        let m = u64::from_le_bytes(read_u64(&mut r)?) as usize;
        let t = f64::from_le_bytes(read_u64(&mut r)?);
        let shape_hash = u64::from_le_bytes(read_u64(&mut r)?);
        let time = TimeGrid::new(t, m)?;
        let space = SpaceGrid::new(n)?;
        let mut block = || -> Result<Vec<f64>> {
            let mut buf = vec![0u8; 8 * n * n];
            r.read_exact(&mut buf)?;
            Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
        };
        let b = (0..m).map(|_| block()).collect::<Result<Vec<_>>>()?;
        let a = (0..m).map(|_| block()).collect::<Result<Vec<_>>>()?;
        Ok(Self { kind, time, space, shape_hash, b, a })
    }
}

fn matvec(a: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|r| a[r * n..(r + 1) * n].iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}
