//! File formats: edge lists, binary table dumps and CSV reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value read back from a CSV is bit-identical to the value written.
//!
//! Binary dump layout:
//!
//! ```text
//! "IDXWT1"                      6 bytes
//! A, B, w, r, p                 u32 little-endian each
//! pointer table                 (A + 1) fields of p bits, MSB-first
//! weight stream                 pointer[A] bits, continuing the same bit stream
//! padding                       zero bits up to the next byte boundary
//! ```

use std::io::{self, BufRead, Write};

use spikeforge_core::analysis::{DiffStats, MemoryCurve};
use spikeforge_core::bits::BitBuf;
use spikeforge_core::connectivity::{ConnectivityMatrix, IndexedTable, TableDims};
use spikeforge_core::neurocore::Trajectory;
use spikeforge_core::plasticity::SpikeTrace;

pub const MAGIC: &[u8; 6] = b"IDXWT1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("bad table dump: {0}")]
    Dump(String),
    #[error(transparent)]
    Core(#[from] spikeforge_core::Error),
}

fn csv_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Csv { line, message: message.into() }
}

/// Reads `pre,post,weight` rows. Without `dims`, the table is sized to the
/// largest indices present and `weight_bits`.
pub fn read_edges<R: BufRead>(
    reader: R,
    dims: Option<TableDims>,
    weight_bits: u32,
) -> Result<ConnectivityMatrix, FormatError> {
    let mut edges = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, header)) => {
            if header?.trim() != "pre,post,weight" {
                return Err(csv_err(1, "expected header `pre,post,weight`"));
            }
        }
        None => return Err(csv_err(1, "empty edge list")),
    }
    for (n, line) in lines {
        let line = line?;
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let [pre, post, weight] = fields[..] else {
            return Err(csv_err(line_no, "expected 3 fields"));
        };
        let pre: usize = pre.parse().map_err(|e| csv_err(line_no, format!("pre: {e}")))?;
        let post: usize = post.parse().map_err(|e| csv_err(line_no, format!("post: {e}")))?;
        let weight: f64 = weight.parse().map_err(|e| csv_err(line_no, format!("weight: {e}")))?;
        if !weight.is_finite() {
            return Err(csv_err(line_no, "weight must be finite"));
        }
        edges.push((line_no, pre, post, weight));
    }
    let dims = match dims {
        Some(d) => d,
        None => {
            let a = edges.iter().map(|e| e.1 + 1).max().unwrap_or(0);
            let b = edges.iter().map(|e| e.2 + 1).max().unwrap_or(0);
            TableDims::new(a.max(1), b.max(1), weight_bits)?
        }
    };
    let mut m = ConnectivityMatrix::empty(dims);
    for (line_no, pre, post, weight) in edges {
        if m.is_present(pre, post) {
            return Err(csv_err(line_no, format!("duplicate edge ({pre}, {post})")));
        }
        m.connect(pre, post, weight).map_err(|e| csv_err(line_no, e.to_string()))?;
    }
    Ok(m)
}

/// Writes present connections in row-major order.
pub fn write_edges<W: Write>(mut w: W, matrix: &ConnectivityMatrix) -> io::Result<()> {
    writeln!(w, "pre,post,weight")?;
    for (i, j, x) in matrix.iter() {
        writeln!(w, "{i},{j},{x}")?;
    }
    Ok(())
}

pub fn dump_table(table: &IndexedTable) -> Vec<u8> {
    let dims = table.dims();
    let mut out = Vec::with_capacity(26);
    out.extend_from_slice(MAGIC);
    for v in [dims.inputs() as u32, dims.neurons() as u32, dims.weight_bits(), table.run_bits(), table.pointer_bits()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let mut bits = BitBuf::with_capacity(table.memory_bits() as usize);
    for &ptr in table.pointers() {
        bits.push(ptr, table.pointer_bits());
    }
    bits.extend_from(table.stream());
    out.extend_from_slice(&bits.to_bytes());
    out
}

pub fn load_table(bytes: &[u8]) -> Result<IndexedTable, FormatError> {
    let bad = |m: &str| FormatError::Dump(m.into());
    if bytes.len() < 26 || &bytes[..6] != MAGIC {
        return Err(bad("missing IDXWT1 header"));
    }
    let field = |k: usize| u32::from_le_bytes(bytes[6 + 4 * k..10 + 4 * k].try_into().expect("4 bytes"));
    let (a, b, w, r, p) = (field(0), field(1), field(2), field(3), field(4));
    let dims = TableDims::new(a as usize, b as usize, w)?;
    if r != dims.run_bits() || p != dims.pointer_bits() {
        return Err(FormatError::Dump(format!(
            "header r={r}, p={p} disagree with dimensions (expected r={}, p={})",
            dims.run_bits(),
            dims.pointer_bits()
        )));
    }
    let body = &bytes[26..];
    let body_bits = body.len() as u64 * 8;
    let table_bits = dims.pointer_table_bits();
    if table_bits > body_bits {
        return Err(bad("truncated pointer table"));
    }
    let all = BitBuf::from_bytes(body, body_bits as usize).ok_or_else(|| bad("truncated body"))?;
    let pointers: Vec<u64> = (0..=a as usize).map(|k| all.get(k * p as usize, p)).collect();
    let stream_bits = *pointers.last().expect("A + 1 pointers");
    let total = table_bits + stream_bits;
    if total.div_ceil(8) != body.len() as u64 {
        return Err(FormatError::Dump(format!(
            "body is {} bytes, header and pointers imply {}",
            body.len(),
            total.div_ceil(8)
        )));
    }
    if (total..body_bits).any(|k| all.get_bit(k as usize)) {
        return Err(bad("non-zero padding"));
    }
    let mut stream = BitBuf::with_capacity(stream_bits as usize);
    let mut pos = table_bits as usize;
    while pos < total as usize {
        let n = (total as usize - pos).min(64) as u32;
        stream.push(all.get(pos, n), n);
        pos += n as usize;
    }
    Ok(IndexedTable::from_parts(dims, pointers, stream)?)
}

pub fn write_trajectory<W: Write>(mut w: W, trajectory: &Trajectory) -> io::Result<()> {
    writeln!(w, "tick,pre,post,weight")?;
    for (tick, i, j, x) in trajectory.rows() {
        writeln!(w, "{tick},{i},{j},{x}")?;
    }
    Ok(())
}

/// `pre,post,weight_forward,weight_oracle`; a missing engine leaves its
/// column empty.
pub fn write_final_weights<W: Write>(
    mut w: W,
    forward: Option<&ConnectivityMatrix>,
    oracle: Option<&ConnectivityMatrix>,
) -> io::Result<()> {
    writeln!(w, "pre,post,weight_forward,weight_oracle")?;
    let Some(base) = forward.or(oracle) else {
        return Ok(());
    };
    let cell =
        |m: Option<&ConnectivityMatrix>, i, j| m.and_then(|m| m.get(i, j)).map(|x| x.to_string()).unwrap_or_default();
    for (i, j, _) in base.iter() {
        writeln!(w, "{i},{j},{},{}", cell(forward, i, j), cell(oracle, i, j))?;
    }
    Ok(())
}

pub fn write_diff<W: Write>(mut w: W, stats: &DiffStats) -> io::Result<()> {
    writeln!(w, "pre,post,w_oracle,w_forward,diff")?;
    for d in &stats.diffs {
        writeln!(w, "{},{},{},{},{}", d.pre, d.post, d.w_oracle, d.w_forward, d.diff)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffRow {
    pub pre: usize,
    pub post: usize,
    pub w_oracle: f64,
    pub w_forward: f64,
    pub diff: f64,
}

pub fn read_diff<R: BufRead>(reader: R) -> Result<Vec<DiffRow>, FormatError> {
    let mut rows = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if n == 0 {
            if line.trim() != "pre,post,w_oracle,w_forward,diff" {
                return Err(csv_err(1, "unexpected diff header"));
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let parse = |k: usize| f.get(k).and_then(|s| s.parse::<f64>().ok()).ok_or_else(|| csv_err(n + 1, "bad field"));
        let idx = |k: usize| f.get(k).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| csv_err(n + 1, "bad field"));
        rows.push(DiffRow { pre: idx(0)?, post: idx(1)?, w_oracle: parse(2)?, w_forward: parse(3)?, diff: parse(4)? });
    }
    Ok(rows)
}

pub fn write_histogram<W: Write>(mut w: W, stats: &DiffStats) -> io::Result<()> {
    writeln!(w, "bin_low,bin_high,count")?;
    for b in &stats.histogram {
        writeln!(w, "{},{},{}", b.low, b.high, b.count)?;
    }
    Ok(())
}

pub fn write_memory_curve<W: Write>(mut w: W, curve: &MemoryCurve) -> io::Result<()> {
    writeln!(w, "d,crossbar_bits,indexed_bits_mean,indexed_bits_stddev")?;
    for p in &curve.points {
        writeln!(w, "{},{},{},{}", p.density, p.crossbar_bits, p.indexed_bits.mean, p.indexed_bits.stddev)?;
    }
    Ok(())
}

/// `source,tick` sorted by tick, then source. Inputs are sources
/// `0..A`, neurons `A..A+B`.
pub fn write_spikes<W: Write>(mut w: W, trace: &SpikeTrace) -> io::Result<()> {
    let a = trace.inputs();
    let mut events: Vec<(u64, usize)> = Vec::with_capacity(trace.spike_count());
    for i in 0..a {
        events.extend(trace.pre(i).iter().map(|&t| (t, i)));
    }
    for j in 0..trace.neurons() {
        events.extend(trace.post(j).iter().map(|&t| (t, a + j)));
    }
    events.sort_unstable();
    writeln!(w, "source,tick")?;
    for (t, s) in events {
        writeln!(w, "{s},{t}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use spikeforge_core::rng::SplitMix64;

    fn hand_matrix() -> ConnectivityMatrix {
        let dims = TableDims::new(2, 4, 4).unwrap();
        ConnectivityMatrix::from_entries(dims, [(0, 0, 5.0), (0, 2, 3.0)]).unwrap()
    }

    #[test]
    fn hand_example_dump() {
        let t = IndexedTable::encode(&hand_matrix()).unwrap();
        let bytes = dump_table(&t);
        assert_eq!(&bytes[..6], b"IDXWT1");
        // A=2, B=4, w=4, r=2, p=6
        assert_eq!(&bytes[6..26], &[2, 0, 0, 0, 4, 0, 0, 0, 4, 0, 0, 0, 2, 0, 0, 0, 6, 0, 0, 0]);
        // pointers 0, 13, 13 as 6-bit fields, stream [1|0101][0|01][1|0011], one pad bit
        let body: String = bytes[26..].iter().map(|b| format!("{b:08b}")).collect();
        assert_eq!(body, "000000001101001101".to_owned() + "1010100110011" + "0");
        assert!(load_table(&bytes).unwrap().decode().bit_eq(&hand_matrix()));
    }

    #[test]
    fn dump_round_trip_random() {
        let mut rng = SplitMix64::new(5);
        for (a, b, w) in [(1, 1, 1), (3, 17, 9), (16, 16, 4), (7, 64, 16)] {
            let dims = TableDims::new(a, b, w).unwrap();
            for d in [0.0, 0.1, 0.5, 1.0] {
                let m = ConnectivityMatrix::bernoulli(dims, d, -1.0, &mut rng);
                let t = IndexedTable::encode(&m).unwrap();
                let back = load_table(&dump_table(&t)).unwrap();
                assert_eq!(back.pointers(), t.pointers());
                assert!(back.decode().bit_eq(&m.quantized().unwrap()));
            }
        }
    }

    #[test]
    fn corrupt_dumps() {
        let bytes = dump_table(&IndexedTable::encode(&hand_matrix()).unwrap());
        let mut short = bytes.clone();
        short.pop();
        assert!(load_table(&short).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(load_table(&long).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(load_table(&magic).is_err());
        let mut pad = bytes.clone();
        *pad.last_mut().unwrap() |= 1;
        assert!(load_table(&pad).is_err());
        let mut header = bytes.clone();
        header[18] = 3;
        assert!(load_table(&header).is_err());
    }

    #[test]
    fn edges_round_trip_and_errors() {
        let m = hand_matrix();
        let mut buf = Vec::new();
        write_edges(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "pre,post,weight\n0,0,5\n0,2,3\n");
        let back = read_edges(&buf[..], Some(m.dims()), 4).unwrap();
        assert!(back.bit_eq(&m));
        let inferred = read_edges(&buf[..], None, 4).unwrap();
        assert_eq!((inferred.dims().inputs(), inferred.dims().neurons()), (1, 3));

        for (text, line) in [
            ("pre,post\n", 1),
            ("pre,post,weight\n0,1\n", 2),
            ("pre,post,weight\n0,1,x\n", 2),
            ("pre,post,weight\n0,1,1\n0,1,2\n", 3),
            ("pre,post,weight\n\n5,0,1\n", 3),
        ] {
            match read_edges(text.as_bytes(), Some(m.dims()), 4) {
                Err(FormatError::Csv { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn spikes_sorted_by_tick_then_source() {
        let trace = SpikeTrace::from_lists(vec![vec![3, 5], vec![1]], vec![vec![3]]).unwrap();
        let mut buf = Vec::new();
        write_spikes(&mut buf, &trace).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "source,tick\n1,1\n0,3\n2,3\n0,5\n");
    }
}
