//! 1-2 model configurations: edge presence, local codes, the weight table and
//! the `ot12 v1` text format.

use std::fmt;
use std::sync::Arc;

use bitvec::prelude::*;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Boundary, EdgeKind, Geometry, Mode, Slot, VertexId};
use crate::scalar::Scalar;

/// The 3-bit configuration at a vertex: bit 0 = a-edge, bit 1 = b-edge,
/// bit 2 = c-edge. Written as `{cba}`, so `{001}` is "only the horizontal edge".
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocalCode(u8);

impl LocalCode {
    pub const EMPTY: LocalCode = LocalCode(0);
    pub const HORIZONTAL: LocalCode = LocalCode(1);
    pub const FULL: LocalCode = LocalCode(7);
    /// The six codes allowed by the 1-2 law.
    pub const VALID: [LocalCode; 6] =
        [LocalCode(1), LocalCode(2), LocalCode(3), LocalCode(4), LocalCode(5), LocalCode(6)];

    pub fn new(value: u8) -> Result<LocalCode> {
        if value < 8 {
            Ok(LocalCode(value))
        } else {
            Err(Error::OutOfRange { what: "local code", value: value as usize, range: "0..8" })
        }
    }

    #[inline]
    pub(crate) const fn from_bits(bits: u8) -> LocalCode {
        LocalCode(bits & 7)
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn degree(self) -> u32 {
        self.0.count_ones()
    }

    #[inline]
    pub fn is_valid(self) -> bool {
        self.0 != 0 && self.0 != 7
    }

    #[inline]
    pub fn has(self, kind: EdgeKind) -> bool {
        self.0 & kind.bit() != 0
    }
}

impl fmt::Display for LocalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{:03b}}}", self.0)
    }
}

/// Vertex weights `(a, b, c)`, all strictly positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Weights<T> {
    a: T,
    b: T,
    c: T,
}

impl<T: Scalar> Weights<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Weights<T>> {
        for (name, v) in [("a", &a), ("b", &b), ("c", &c)] {
            // written so that NaN fails too
            if !(*v > T::zero()) {
                return Err(Error::InvalidWeights(format!("{name} = {v:?} must be > 0")));
            }
        }
        Ok(Weights { a, b, c })
    }

    pub fn uniform() -> Weights<T> {
        Weights { a: T::one(), b: T::one(), c: T::one() }
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    pub fn c(&self) -> &T {
        &self.c
    }

    /// Table lookup: `0, a, b, c, c, b, a, 0` for codes 0..7.
    #[inline]
    pub fn weight_of(&self, code: LocalCode) -> T {
        match code.0 {
            1 | 6 => self.a.clone(),
            2 | 5 => self.b.clone(),
            3 | 4 => self.c.clone(),
            _ => T::zero(),
        }
    }

    /// `(min, max)` of the three weights.
    pub fn extremes(&self) -> (T, T) {
        let mut lo = self.a.clone();
        let mut hi = self.a.clone();
        for v in [&self.b, &self.c] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    }

    /// Table with the b and c weights exchanged.
    pub fn swap_bc(&self) -> Weights<T> {
        Weights { a: self.a.clone(), b: self.c.clone(), c: self.b.clone() }
    }

    pub fn scaled(&self, factor: T) -> Weights<T> {
        Weights {
            a: self.a.clone() * factor.clone(),
            b: self.b.clone() * factor.clone(),
            c: self.c.clone() * factor,
        }
    }
}

pub fn weight_of<T: Scalar>(code: LocalCode, w: &Weights<T>) -> T {
    w.weight_of(code)
}

/// Edge presence over a geometry; one bit per stored edge in canonical order.
/// Validity under the 1-2 law is checked, not enforced, because surgeries pass
/// through invalid intermediate states.
#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    geometry: Arc<Geometry>,
    bits: BitVec<u64, Lsb0>,
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Configuration({}, {})", self.geometry.describe(), pack_hex_bits(&self.bits))
    }
}

impl Configuration {
    pub fn empty(geometry: Arc<Geometry>) -> Configuration {
        let bits = bitvec![u64, Lsb0; 0; geometry.edge_count()];
        Configuration { geometry, bits }
    }

    pub fn full(geometry: Arc<Geometry>) -> Configuration {
        let bits = bitvec![u64, Lsb0; 1; geometry.edge_count()];
        Configuration { geometry, bits }
    }

    /// Every a-edge present and nothing else; every vertex has code `{001}`.
    pub fn all_horizontal(geometry: Arc<Geometry>) -> Configuration {
        let mut cfg = Configuration::empty(geometry);
        for e in 0..cfg.edge_count() {
            if cfg.geometry.edge_kind(e) == EdgeKind::A {
                cfg.bits.set(e, true);
            }
        }
        cfg
    }

    pub fn from_bits(geometry: Arc<Geometry>, present: &[bool]) -> Result<Configuration> {
        if present.len() != geometry.edge_count() {
            return Err(Error::Precondition(format!(
                "{} presence bits for {} edges",
                present.len(),
                geometry.edge_count()
            )));
        }
        let bits = present.iter().copied().collect();
        Ok(Configuration { geometry, bits })
    }

    /// Configuration whose first 64 edges follow the bits of `mask`.
    pub fn from_mask(geometry: Arc<Geometry>, mask: u64) -> Configuration {
        let mut cfg = Configuration::empty(geometry);
        for e in 0..cfg.edge_count().min(64) {
            cfg.bits.set(e, mask >> e & 1 == 1);
        }
        cfg
    }

    /// Presence bits packed into a `u64`; `None` for more than 64 edges.
    pub fn to_mask(&self) -> Option<u64> {
        (self.edge_count() <= 64).then(|| self.bits.iter_ones().fold(0u64, |m, e| m | 1 << e))
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geometry
    }

    pub fn edge_count(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_present(&self, e: usize) -> bool {
        self.bits[e]
    }

    #[inline]
    pub fn set(&mut self, e: usize, present: bool) {
        self.bits.set(e, present);
    }

    pub fn flip_edge(&mut self, e: usize) {
        let v = self.bits[e];
        self.bits.set(e, !v);
    }

    /// Returns a copy with edge `e` toggled.
    pub fn flipped(&self, e: usize) -> Configuration {
        let mut out = self.clone();
        out.flip_edge(e);
        out
    }

    #[inline]
    pub fn slot_present(&self, slot: Slot) -> bool {
        match slot {
            Slot::Edge(e) => self.bits[e as usize],
            Slot::Stub(s) => self.geometry.stub_value(s),
        }
    }

    #[inline]
    pub fn code_at(&self, v: usize) -> LocalCode {
        let slots = self.geometry.incident(v);
        let mut bits = 0u8;
        for (k, slot) in slots.iter().enumerate() {
            if self.slot_present(*slot) {
                bits |= 1 << k;
            }
        }
        LocalCode(bits)
    }

    pub fn local_code(&self, v: VertexId) -> Result<LocalCode> {
        Ok(self.code_at(self.geometry.vertex_index(v)?))
    }

    #[inline]
    pub fn degree_at(&self, v: usize) -> u32 {
        self.code_at(v).degree()
    }

    /// Dense indices of all vertices with degree 0 or 3.
    pub fn violation_indices(&self) -> Vec<usize> {
        (0..self.geometry.vertex_count()).filter(|&v| !self.code_at(v).is_valid()).collect()
    }

    pub fn violations(&self) -> Vec<VertexId> {
        self.violation_indices().into_iter().map(|v| self.geometry.vertex_id(v)).collect()
    }

    pub fn is_valid(&self) -> bool {
        (0..self.geometry.vertex_count()).all(|v| self.code_at(v).is_valid())
    }

    /// Product of vertex weights.
    pub fn weight<T: Scalar>(&self, w: &Weights<T>) -> T {
        let mut acc = T::one();
        for v in 0..self.geometry.vertex_count() {
            let x = w.weight_of(self.code_at(v));
            if x.is_zero() {
                return T::zero();
            }
            acc = acc * x;
        }
        acc
    }

    /// `Σ_v log w(code(v))`; `-inf` as soon as one vertex is invalid.
    pub fn log_weight<T: Scalar + Float>(&self, w: &Weights<T>) -> T {
        let (la, lb, lc) = (w.a.ln(), w.b.ln(), w.c.ln());
        let mut acc = T::zero();
        for v in 0..self.geometry.vertex_count() {
            acc = acc
                + match self.code_at(v).0 {
                    1 | 6 => la,
                    2 | 5 => lb,
                    3 | 4 => lc,
                    _ => return T::neg_infinity(),
                };
        }
        acc
    }

    /// Number of vertices carrying each code, indexed by code value.
    pub fn code_histogram(&self) -> [usize; 8] {
        let mut h = [0; 8];
        for v in 0..self.geometry.vertex_count() {
            h[self.code_at(v).0 as usize] += 1;
        }
        h
    }

    pub fn present_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    /// Number of edges whose presence differs.
    pub fn hamming(&self, other: &Configuration) -> usize {
        (self.bits.clone() ^ other.bits.clone()).count_ones()
    }

    /// Shift by whole cells on a torus.
    pub fn translated(&self, dx: i64, dy: i64) -> Result<Configuration> {
        let Mode::Torus { .. } = self.geometry.mode() else {
            return Err(Error::Precondition("translation needs a torus".into()));
        };
        let mut out = Configuration::empty(self.geometry.clone());
        for e in self.bits.iter_ones() {
            let id = self.geometry.edge_id(e);
            let moved = crate::lattice::EdgeId { x: id.x + dx, y: id.y + dy, kind: id.kind };
            let Some(Slot::Edge(t)) = self.geometry.edge_slot(moved) else { unreachable!() };
            out.bits.set(t as usize, true);
        }
        Ok(out)
    }

    /// Serializes to the `ot12 v1` text format.
    pub fn to_text(&self) -> String {
        format!("ot12 v1 {}\n{}\n", self.geometry.describe(), pack_hex_bits(&self.bits))
    }

    pub fn from_text(text: &str) -> Result<Configuration> {
        let (geometry, body, body_offset) = parse_header(text)?;
        let bits = unpack_hex(body.trim_end_matches(['\n', '\r']), geometry.edge_count(), body_offset)?;
        Ok(Configuration { geometry: Arc::new(geometry), bits })
    }
}

pub(crate) fn pack_hex_bits(bits: &BitSlice<u64, Lsb0>) -> String {
    let mut bytes = vec![0u8; bits.len().div_ceil(8)];
    for i in bits.iter_ones() {
        bytes[i / 8] |= 1 << (i % 8);
    }
    hex::encode(bytes)
}

/// Packs booleans LSB-first into bytes and hex-encodes them.
pub fn pack_hex(values: &[bool]) -> String {
    let bits: BitVec<u64, Lsb0> = values.iter().copied().collect();
    pack_hex_bits(&bits)
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

fn unpack_hex(s: &str, n_bits: usize, offset: usize) -> Result<BitVec<u64, Lsb0>> {
    let want = n_bits.div_ceil(8) * 2;
    if s.len() != want {
        return Err(parse_err(offset, format!("expected {want} hex digits, found {}", s.len())));
    }
    if let Some(i) = s.bytes().position(|c| !c.is_ascii_hexdigit()) {
        return Err(parse_err(offset + i, "not a hex digit"));
    }
    let bytes = hex::decode(s).map_err(|e| parse_err(offset, e.to_string()))?;
    let mut bits = bitvec![u64, Lsb0; 0; n_bits];
    for (i, byte) in bytes.iter().enumerate() {
        for b in 0..8 {
            if byte >> b & 1 == 1 {
                let idx = i * 8 + b;
                if idx >= n_bits {
                    return Err(parse_err(offset + 2 * i, "padding bits must be zero"));
                }
                bits.set(idx, true);
            }
        }
    }
    Ok(bits)
}

fn parse_header(text: &str) -> Result<(Geometry, &str, usize)> {
    let nl = text.find('\n').ok_or_else(|| parse_err(text.len(), "missing newline after header"))?;
    let header = text[..nl].trim_end_matches('\r');
    let mut offset = 0;
    let mut fields = Vec::new();
    for tok in header.split(' ') {
        fields.push((offset, tok));
        offset += tok.len() + 1;
    }
    let field = |i: usize| fields.get(i).copied().ok_or_else(|| parse_err(header.len(), "truncated header"));
    let (o, magic) = field(0)?;
    if magic != "ot12" {
        return Err(parse_err(o, format!("bad magic {magic:?}")));
    }
    let (o, version) = field(1)?;
    if version != "v1" {
        return Err(parse_err(o, format!("unsupported version {version:?}")));
    }
    let value = |i: usize, key: &str| -> Result<(usize, &str)> {
        let (o, tok) = field(i)?;
        tok.strip_prefix(key)
            .and_then(|t| t.strip_prefix('='))
            .map(|v| (o + key.len() + 1, v))
            .ok_or_else(|| parse_err(o, format!("expected {key}=...")))
    };
    let number = |i: usize, key: &str| -> Result<usize> {
        let (o, v) = value(i, key)?;
        v.parse().map_err(|_| parse_err(o, format!("{key} is not a number")))
    };
    let (o, mode) = field(2)?;
    let (geometry, used) = match mode {
        "torus" => {
            let l = number(3, "L")?;
            (Geometry::torus(l).map_err(|e| parse_err(o, e.to_string()))?, 4)
        }
        "window" => {
            let w = number(3, "w")?;
            let h = number(4, "h")?;
            let (bo, b) = value(5, "boundary")?;
            let free = Geometry::window(w, h, Boundary::Free).map_err(|e| parse_err(o, e.to_string()))?;
            let geometry = if b == "free" {
                free
            } else if let Some(hexs) = b.strip_prefix("fixed:") {
                let stubs = unpack_hex(hexs, free.stub_count(), bo + 6)?;
                free.with_boundary(Boundary::Fixed(stubs.iter().by_vals().collect()))
                    .map_err(|e| parse_err(bo, e.to_string()))?
            } else {
                return Err(parse_err(bo, "boundary must be free or fixed:<hex>"));
            };
            (geometry, 6)
        }
        other => return Err(parse_err(o, format!("unknown geometry {other:?}"))),
    };
    if fields.len() > used {
        return Err(parse_err(fields[used].0, "unexpected trailing header field"));
    }
    Ok((geometry, &text[nl + 1..], nl + 1))
}
