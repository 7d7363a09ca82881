//! Synaptic weight tables: the dense crossbar layout and the index-based
//! layout made of a pointer table plus a run-length encoded weight stream.
//!
//! Index-based stream format, per input row, most significant bit first:
//!
//! ```text
//! 1 | w-bit weight      present connection at the current neuron position
//! 0 | r-bit run count   skip `count >= 1` absent neuron positions
//! ```
//!
//! Trailing absent positions are never encoded, so an empty row takes zero
//! bits and every run count fits `r = ceil(log2(B))` bits. The pointer table
//! holds `A + 1` bit offsets of `p = ceil(log2(A * B * (1 + w) + 1))` bits;
//! entry `A` is the end sentinel.
//!
//! Simulation weights are `f64`. Stored weights are signed `w`-bit two's
//! complement integers obtained by rounding half away from zero. The indexed
//! table keeps the real-valued weights alongside the stream so that both
//! layouts hand identical values to the plasticity engines.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitBuf;
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Smallest `k` with `2^k >= n`; zero for `n <= 1`.
pub fn ceil_log2(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TableDims {
    inputs: usize,
    neurons: usize,
    weight_bits: u32,
}

impl TableDims {
    pub fn new(inputs: usize, neurons: usize, weight_bits: u32) -> Result<Self> {
        if inputs == 0 || neurons == 0 || !(1..=64).contains(&weight_bits) {
            return Err(Error::InvalidDims { inputs, neurons, weight_bits });
        }
        Ok(Self { inputs, neurons, weight_bits })
    }

    /// Number of core inputs (axons), `A`.
    pub fn inputs(&self) -> usize {
        self.inputs
    }

    /// Number of post-synaptic neurons, `B`.
    pub fn neurons(&self) -> usize {
        self.neurons
    }

    pub fn weight_bits(&self) -> u32 {
        self.weight_bits
    }

    pub fn synapse_slots(&self) -> usize {
        self.inputs * self.neurons
    }

    /// Width of a run-count field.
    pub fn run_bits(&self) -> u32 {
        ceil_log2(self.neurons as u128)
    }

    /// Width of a pointer-table entry, sized for a fully connected table.
    pub fn pointer_bits(&self) -> u32 {
        let max_stream = self.inputs as u128 * self.neurons as u128 * (1 + self.weight_bits as u128);
        ceil_log2(max_stream + 1)
    }

    pub fn crossbar_bits(&self) -> u64 {
        self.inputs as u64 * self.neurons as u64 * self.weight_bits as u64
    }

    pub fn pointer_table_bits(&self) -> u64 {
        (self.inputs as u64 + 1) * self.pointer_bits() as u64
    }

    /// Closed range of integers representable in signed `w`-bit storage.
    pub fn storage_range(&self) -> (f64, f64) {
        let half = (1u128 << (self.weight_bits - 1)) as f64;
        (-half, half - 1.0)
    }

    pub(crate) fn check_input(&self, input: usize) -> Result<()> {
        if input >= self.inputs {
            return Err(Error::InputOutOfRange { input, inputs: self.inputs });
        }
        Ok(())
    }

    pub(crate) fn check_neuron(&self, neuron: usize) -> Result<()> {
        if neuron >= self.neurons {
            return Err(Error::NeuronOutOfRange { neuron, neurons: self.neurons });
        }
        Ok(())
    }
}

/// Rounds half away from zero into signed `bits`-bit two's complement.
pub fn quantize(value: f64, bits: u32) -> Result<i64> {
    let rounded = libm::round(value);
    let half = (1u128 << (bits - 1)) as f64;
    if !(rounded >= -half && rounded < half) {
        return Err(Error::Quantization { value, bits });
    }
    Ok(rounded as i64)
}

/// Like [`quantize`] but clamps instead of failing. NaN maps to zero.
pub fn quantize_saturating(value: f64, bits: u32) -> i64 {
    let half = (1u128 << (bits - 1)) as f64;
    let rounded = libm::round(value);
    if rounded.is_nan() {
        0
    } else if rounded < -half {
        (-(1i128 << (bits - 1))) as i64
    } else if rounded >= half {
        ((1i128 << (bits - 1)) - 1) as i64
    } else {
        rounded as i64
    }
}

#[inline]
fn to_field(q: i64, bits: u32) -> u64 {
    if bits >= 64 {
        q as u64
    } else {
        (q as u64) & ((1u64 << bits) - 1)
    }
}

#[inline]
fn from_field(raw: u64, bits: u32) -> i64 {
    let shift = 64 - bits;
    ((raw << shift) as i64) >> shift
}

/// Presence and real-valued weight for every `(input, neuron)` slot.
///
/// Absence is distinct from weight zero: absent slots never take part in
/// plasticity.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityMatrix {
    dims: TableDims,
    cells: Vec<Option<f64>>,
}

impl ConnectivityMatrix {
    /// Matrix with no connections.
    pub fn empty(dims: TableDims) -> Self {
        Self { dims, cells: vec![None; dims.synapse_slots()] }
    }

    /// Every slot connected with the same weight.
    pub fn full(dims: TableDims, weight: f64) -> Self {
        Self { dims, cells: vec![Some(weight); dims.synapse_slots()] }
    }

    /// Each slot independently present with probability `density`, drawn in
    /// row-major order from `rng`.
    pub fn bernoulli(dims: TableDims, density: f64, weight: f64, rng: &mut SplitMix64) -> Self {
        let cells = (0..dims.synapse_slots()).map(|_| rng.bernoulli(density).then_some(weight)).collect();
        Self { dims, cells }
    }

    pub fn from_entries<I>(dims: TableDims, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut m = Self::empty(dims);
        for (i, j, w) in entries {
            m.connect(i, j, w)?;
        }
        Ok(m)
    }

    pub fn dims(&self) -> TableDims {
        self.dims
    }

    #[inline]
    fn index(&self, input: usize, neuron: usize) -> usize {
        input * self.dims.neurons + neuron
    }

    pub fn get(&self, input: usize, neuron: usize) -> Option<f64> {
        if input >= self.dims.inputs || neuron >= self.dims.neurons {
            return None;
        }
        self.cells[self.index(input, neuron)]
    }

    pub fn is_present(&self, input: usize, neuron: usize) -> bool {
        self.get(input, neuron).is_some()
    }

    /// Adds (or overwrites) the connection `(input, neuron)`.
    pub fn connect(&mut self, input: usize, neuron: usize, weight: f64) -> Result<()> {
        self.dims.check_input(input)?;
        self.dims.check_neuron(neuron)?;
        let k = self.index(input, neuron);
        self.cells[k] = Some(weight);
        Ok(())
    }

    pub fn disconnect(&mut self, input: usize, neuron: usize) -> Result<()> {
        self.dims.check_input(input)?;
        self.dims.check_neuron(neuron)?;
        let k = self.index(input, neuron);
        self.cells[k] = None;
        Ok(())
    }

    /// Present connections of one row in ascending neuron order.
    pub fn row(&self, input: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = input * self.dims.neurons;
        self.cells[start..start + self.dims.neurons].iter().enumerate().filter_map(|(j, w)| w.map(|w| (j, w)))
    }

    /// All present connections as `(input, neuron, weight)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let b = self.dims.neurons;
        self.cells.iter().enumerate().filter_map(move |(k, w)| w.map(|w| (k / b, k % b, w)))
    }

    pub fn present_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn density(&self) -> f64 {
        self.present_count() as f64 / self.dims.synapse_slots() as f64
    }

    /// Same presence pattern and bit-identical weights.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.dims == other.dims
            && self.cells.iter().zip(&other.cells).all(|(a, b)| match (a, b) {
                (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
                (None, None) => true,
                _ => false,
            })
    }

    /// Copy with every weight replaced by its stored integer value.
    pub fn quantized(&self) -> Result<Self> {
        let bits = self.dims.weight_bits;
        let cells = self
            .cells
            .iter()
            .map(|c| c.map(|w| quantize(w, bits).map(|q| q as f64)).transpose())
            .collect::<Result<_>>()?;
        Ok(Self { dims: self.dims, cells })
    }
}

/// Dense layout: one `w`-bit slot per `(input, neuron)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarTable {
    dims: TableDims,
    cells: Vec<Option<f64>>,
}

impl CrossbarTable {
    pub fn from_matrix(matrix: &ConnectivityMatrix) -> Result<Self> {
        let bits = matrix.dims.weight_bits;
        for w in matrix.cells.iter().flatten() {
            quantize(*w, bits)?;
        }
        Ok(Self { dims: matrix.dims, cells: matrix.cells.clone() })
    }

    pub fn dims(&self) -> TableDims {
        self.dims
    }

    pub fn iter_row(&self, input: usize) -> Result<CrossbarRow<'_>> {
        self.dims.check_input(input)?;
        let start = input * self.dims.neurons;
        Ok(CrossbarRow { cells: &self.cells[start..start + self.dims.neurons], next: 0 })
    }

    pub fn get(&self, input: usize, neuron: usize) -> Option<f64> {
        if input >= self.dims.inputs || neuron >= self.dims.neurons {
            return None;
        }
        self.cells[input * self.dims.neurons + neuron]
    }

    pub fn set_weight(&mut self, input: usize, neuron: usize, weight: f64) -> Result<()> {
        self.dims.check_input(input)?;
        self.dims.check_neuron(neuron)?;
        quantize(weight, self.dims.weight_bits)?;
        match &mut self.cells[input * self.dims.neurons + neuron] {
            Some(w) => {
                *w = weight;
                Ok(())
            }
            None => Err(Error::NoSuchConnection { input, neuron }),
        }
    }

    pub fn memory_bits(&self) -> u64 {
        self.dims.crossbar_bits()
    }

    pub fn to_matrix(&self) -> ConnectivityMatrix {
        ConnectivityMatrix { dims: self.dims, cells: self.cells.clone() }
    }

    pub(crate) fn for_each_in_row_mut(&mut self, input: usize, mut f: impl FnMut(usize, &mut f64)) {
        let start = input * self.dims.neurons;
        for (j, cell) in self.cells[start..start + self.dims.neurons].iter_mut().enumerate() {
            if let Some(w) = cell {
                f(j, w);
            }
        }
    }

    pub(crate) fn weight_mut(&mut self, input: usize, neuron: usize) -> Option<&mut f64> {
        self.cells[input * self.dims.neurons + neuron].as_mut()
    }
}

pub struct CrossbarRow<'a> {
    cells: &'a [Option<f64>],
    next: usize,
}

impl Iterator for CrossbarRow<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        while self.next < self.cells.len() {
            let j = self.next;
            self.next += 1;
            if let Some(w) = self.cells[j] {
                return Some((j, w));
            }
        }
        None
    }
}

/// Index-based layout: pointer table plus RLE weight stream.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedTable {
    dims: TableDims,
    pointers: Vec<u64>,
    stream: BitBuf,
    /// Real-valued weights of present connections, in stream order.
    values: Vec<f64>,
    /// Index into `values` of each row's first connection; `A + 1` entries.
    row_slots: Vec<usize>,
}

/// One decoded present entry of a row.
#[derive(Debug, Clone, Copy)]
struct Entry {
    neuron: usize,
    slot: usize,
    weight_pos: usize,
}

impl IndexedTable {
    /// Run-length encodes `matrix`.
    pub fn encode(matrix: &ConnectivityMatrix) -> Result<Self> {
        let dims = matrix.dims;
        let (w, r) = (dims.weight_bits, dims.run_bits());
        let mut stream = BitBuf::new();
        let mut pointers = Vec::with_capacity(dims.inputs + 1);
        let mut values = Vec::new();
        let mut row_slots = Vec::with_capacity(dims.inputs + 1);
        for i in 0..dims.inputs {
            pointers.push(stream.len() as u64);
            row_slots.push(values.len());
            let mut cursor = 0;
            for (j, weight) in matrix.row(i) {
                let q = quantize(weight, w)?;
                if j > cursor {
                    stream.push(0, 1);
                    stream.push((j - cursor) as u64, r);
                }
                stream.push(1, 1);
                stream.push(to_field(q, w), w);
                values.push(weight);
                cursor = j + 1;
            }
        }
        pointers.push(stream.len() as u64);
        row_slots.push(values.len());
        Ok(Self { dims, pointers, stream, values, row_slots })
    }

    /// Rebuilds a table from its stored parts, validating every structural
    /// invariant. Weights come from the stream's integer fields.
    pub fn from_parts(dims: TableDims, pointers: Vec<u64>, stream: BitBuf) -> Result<Self> {
        let corrupt = |row, reason| Error::CorruptTable { row, reason };
        if pointers.len() != dims.inputs + 1 {
            return Err(corrupt(0, "pointer table length is not inputs + 1"));
        }
        if pointers[0] != 0 {
            return Err(corrupt(0, "first pointer is not zero"));
        }
        if pointers[dims.inputs] != stream.len() as u64 {
            return Err(corrupt(dims.inputs, "end sentinel does not match stream length"));
        }
        if let Some(i) = pointers.windows(2).position(|p| p[1] < p[0]) {
            return Err(corrupt(i, "pointer table is decreasing"));
        }
        let (w, r) = (dims.weight_bits, dims.run_bits());
        let mut values = Vec::new();
        let mut row_slots = Vec::with_capacity(dims.inputs + 1);
        for i in 0..dims.inputs {
            row_slots.push(values.len());
            let (mut pos, end) = (pointers[i] as usize, pointers[i + 1] as usize);
            let mut j = 0usize;
            let mut last_was_run = false;
            while pos < end {
                let present = stream.get_bit(pos);
                let width = if present { w } else { r };
                if pos + 1 + width as usize > end {
                    return Err(corrupt(i, "entry crosses row boundary"));
                }
                let field = stream.get(pos + 1, width);
                pos += 1 + width as usize;
                if present {
                    if j >= dims.neurons {
                        return Err(corrupt(i, "positions exceed row length"));
                    }
                    values.push(from_field(field, w) as f64);
                    j += 1;
                } else {
                    if field == 0 {
                        return Err(corrupt(i, "zero run count"));
                    }
                    j = j.saturating_add(field as usize);
                    if j >= dims.neurons {
                        return Err(corrupt(i, "positions exceed row length"));
                    }
                }
                last_was_run = !present;
            }
            if last_was_run {
                return Err(corrupt(i, "trailing run entry"));
            }
        }
        row_slots.push(values.len());
        Ok(Self { dims, pointers, stream, values, row_slots })
    }

    pub fn dims(&self) -> TableDims {
        self.dims
    }

    pub fn pointers(&self) -> &[u64] {
        &self.pointers
    }

    pub fn stream(&self) -> &BitBuf {
        &self.stream
    }

    pub fn run_bits(&self) -> u32 {
        self.dims.run_bits()
    }

    pub fn pointer_bits(&self) -> u32 {
        self.dims.pointer_bits()
    }

    /// Pointer table plus stream.
    pub fn memory_bits(&self) -> u64 {
        self.dims.pointer_table_bits() + self.stream.len() as u64
    }

    pub fn present_count(&self) -> usize {
        self.values.len()
    }

    /// Present connections of row `input`, reading only that row's bits.
    pub fn iter_row(&self, input: usize) -> Result<IndexedRow<'_>> {
        self.dims.check_input(input)?;
        Ok(IndexedRow { table: self, entries: self.entries(input) })
    }

    fn entries(&self, input: usize) -> Entries<'_> {
        Entries {
            stream: &self.stream,
            pos: self.pointers[input] as usize,
            end: self.pointers[input + 1] as usize,
            neuron: 0,
            slot: self.row_slots[input],
            weight_bits: self.dims.weight_bits,
            run_bits: self.dims.run_bits(),
        }
    }

    pub fn get(&self, input: usize, neuron: usize) -> Option<f64> {
        if input >= self.dims.inputs {
            return None;
        }
        self.entries(input).find(|e| e.neuron == neuron).map(|e| self.values[e.slot])
    }

    pub fn set_weight(&mut self, input: usize, neuron: usize, weight: f64) -> Result<()> {
        self.dims.check_input(input)?;
        self.dims.check_neuron(neuron)?;
        let w = self.dims.weight_bits;
        let q = quantize(weight, w)?;
        let entry =
            self.entries(input).find(|e| e.neuron == neuron).ok_or(Error::NoSuchConnection { input, neuron })?;
        self.values[entry.slot] = weight;
        self.stream.set(entry.weight_pos, w, to_field(q, w));
        Ok(())
    }

    /// Matrix holding the stored (quantized) weights.
    pub fn decode(&self) -> ConnectivityMatrix {
        let w = self.dims.weight_bits;
        let mut m = ConnectivityMatrix::empty(self.dims);
        for i in 0..self.dims.inputs {
            for e in self.entries(i) {
                let q = from_field(self.stream.get(e.weight_pos, w), w);
                let k = m.index(i, e.neuron);
                m.cells[k] = Some(q as f64);
            }
        }
        m
    }

    /// Matrix holding the real-valued simulation weights.
    pub fn to_matrix(&self) -> ConnectivityMatrix {
        let mut m = ConnectivityMatrix::empty(self.dims);
        for i in 0..self.dims.inputs {
            for e in self.entries(i) {
                let k = m.index(i, e.neuron);
                m.cells[k] = Some(self.values[e.slot]);
            }
        }
        m
    }

    pub(crate) fn for_each_in_row_mut(&mut self, input: usize, mut f: impl FnMut(usize, &mut f64)) {
        let w = self.dims.weight_bits;
        let entries = Entries {
            stream: &self.stream,
            pos: self.pointers[input] as usize,
            end: self.pointers[input + 1] as usize,
            neuron: 0,
            slot: self.row_slots[input],
            weight_bits: w,
            run_bits: self.dims.run_bits(),
        };
        // The stream is borrowed by the walk; rewrite changed fields afterwards.
        let mut touched: Vec<(usize, usize)> = Vec::new();
        for e in entries {
            let before = self.values[e.slot];
            f(e.neuron, &mut self.values[e.slot]);
            if self.values[e.slot].to_bits() != before.to_bits() {
                touched.push((e.slot, e.weight_pos));
            }
        }
        for (slot, pos) in touched {
            let q = quantize_saturating(self.values[slot], w);
            self.stream.set(pos, w, to_field(q, w));
        }
    }

    pub(crate) fn update_weight(&mut self, input: usize, neuron: usize, f: impl FnOnce(&mut f64)) -> bool {
        let w = self.dims.weight_bits;
        let Some(e) = self.entries(input).find(|e| e.neuron == neuron) else {
            return false;
        };
        f(&mut self.values[e.slot]);
        let q = quantize_saturating(self.values[e.slot], w);
        self.stream.set(e.weight_pos, w, to_field(q, w));
        true
    }
}

struct Entries<'a> {
    stream: &'a BitBuf,
    pos: usize,
    end: usize,
    neuron: usize,
    slot: usize,
    weight_bits: u32,
    run_bits: u32,
}

impl Iterator for Entries<'_> {
    type Item = Entry;

    fn next(&mut self) -> Option<Entry> {
        while self.pos < self.end {
            if self.stream.get_bit(self.pos) {
                let entry = Entry { neuron: self.neuron, slot: self.slot, weight_pos: self.pos + 1 };
                self.pos += 1 + self.weight_bits as usize;
                self.neuron += 1;
                self.slot += 1;
                return Some(entry);
            }
            let run = self.stream.get(self.pos + 1, self.run_bits) as usize;
            self.pos += 1 + self.run_bits as usize;
            self.neuron += run;
        }
        None
    }
}

pub struct IndexedRow<'a> {
    table: &'a IndexedTable,
    entries: Entries<'a>,
}

impl Iterator for IndexedRow<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        self.entries.next().map(|e| (e.neuron, self.table.values[e.slot]))
    }
}

/// Run-length encodes a matrix into the index-based layout.
pub fn encode_indexed(matrix: &ConnectivityMatrix) -> Result<IndexedTable> {
    IndexedTable::encode(matrix)
}

/// Stored weights of an indexed table as a matrix.
pub fn decode_indexed(table: &IndexedTable) -> ConnectivityMatrix {
    table.decode()
}

/// Validates raw table parts and decodes them.
pub fn decode_indexed_parts(dims: TableDims, pointers: Vec<u64>, stream: BitBuf) -> Result<ConnectivityMatrix> {
    IndexedTable::from_parts(dims, pointers, stream).map(|t| t.decode())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Crossbar,
    Indexed,
}

/// Either layout behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightTable {
    Crossbar(CrossbarTable),
    Indexed(IndexedTable),
}

impl WeightTable {
    pub fn build(kind: TableKind, matrix: &ConnectivityMatrix) -> Result<Self> {
        Ok(match kind {
            TableKind::Crossbar => Self::Crossbar(CrossbarTable::from_matrix(matrix)?),
            TableKind::Indexed => Self::Indexed(IndexedTable::encode(matrix)?),
        })
    }

    pub fn kind(&self) -> TableKind {
        match self {
            Self::Crossbar(_) => TableKind::Crossbar,
            Self::Indexed(_) => TableKind::Indexed,
        }
    }

    pub fn dims(&self) -> TableDims {
        match self {
            Self::Crossbar(t) => t.dims(),
            Self::Indexed(t) => t.dims(),
        }
    }

    pub fn iter_row(&self, input: usize) -> Result<RowIter<'_>> {
        Ok(match self {
            Self::Crossbar(t) => RowIter::Crossbar(t.iter_row(input)?),
            Self::Indexed(t) => RowIter::Indexed(t.iter_row(input)?),
        })
    }

    pub fn get(&self, input: usize, neuron: usize) -> Option<f64> {
        match self {
            Self::Crossbar(t) => t.get(input, neuron),
            Self::Indexed(t) => t.get(input, neuron),
        }
    }

    pub fn set_weight(&mut self, input: usize, neuron: usize, weight: f64) -> Result<()> {
        match self {
            Self::Crossbar(t) => t.set_weight(input, neuron, weight),
            Self::Indexed(t) => t.set_weight(input, neuron, weight),
        }
    }

    pub fn memory_bits(&self) -> u64 {
        match self {
            Self::Crossbar(t) => t.memory_bits(),
            Self::Indexed(t) => t.memory_bits(),
        }
    }

    /// Real-valued weights as a matrix.
    pub fn to_matrix(&self) -> ConnectivityMatrix {
        match self {
            Self::Crossbar(t) => t.to_matrix(),
            Self::Indexed(t) => t.to_matrix(),
        }
    }

    /// Visits the present connections of one row (forward lookup) with
    /// mutable access to their weights. `input` must be in range.
    pub(crate) fn for_each_in_row_mut(&mut self, input: usize, f: impl FnMut(usize, &mut f64)) {
        match self {
            Self::Crossbar(t) => t.for_each_in_row_mut(input, f),
            Self::Indexed(t) => t.for_each_in_row_mut(input, f),
        }
    }

    /// Mutates one connection; returns `false` if it is absent.
    pub(crate) fn update_weight(&mut self, input: usize, neuron: usize, f: impl FnOnce(&mut f64)) -> bool {
        match self {
            Self::Crossbar(t) => match t.weight_mut(input, neuron) {
                Some(w) => {
                    f(w);
                    true
                }
                None => false,
            },
            Self::Indexed(t) => t.update_weight(input, neuron, f),
        }
    }
}

pub enum RowIter<'a> {
    Crossbar(CrossbarRow<'a>),
    Indexed(IndexedRow<'a>),
}

impl Iterator for RowIter<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<Self::Item> {
        match self {
            RowIter::Crossbar(it) => it.next(),
            RowIter::Indexed(it) => it.next(),
        }
    }
}

/// Memory cost of both layouts for one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryReport {
    pub crossbar_bits: u64,
    pub indexed_bits: u64,
    pub density: f64,
}

impl MemoryReport {
    pub fn for_matrix(matrix: &ConnectivityMatrix) -> Result<Self> {
        let indexed = IndexedTable::encode(matrix)?;
        Ok(Self {
            crossbar_bits: matrix.dims.crossbar_bits(),
            indexed_bits: indexed.memory_bits(),
            density: matrix.density(),
        })
    }
}

pub fn memory_bits(table: &WeightTable) -> u64 {
    table.memory_bits()
}
