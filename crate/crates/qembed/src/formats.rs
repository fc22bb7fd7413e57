//! Embedding and circuit-parameter files.
//!
//! Binary embeddings (`CWV1`), all integers and floats little-endian:
//!
//! ```text
//! b"CWV1" | u32 rows | u32 dim | u8 mode (0 real, 1 complex)
//! rows x { dim f32 real parts | dim f32 imaginary parts (complex only) }
//! rows x { u32 byte length | UTF-8 word }
//! ```
//!
//! Text embeddings: header `rows dim mode`, then one line per word with the
//! word, its real parts and, in complex mode, its imaginary parts.
//!
//! Circuit parameters (`PQC1`): `u8` id length, id bytes, `u32` qubits,
//! `u32` layers, `u32` rows, then `rows x params` f64 angles in id order and
//! the word list as above. Qubit 0 is the least significant amplitude bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use qembed_core::embedding::EmbeddingTable;
use qembed_core::pqc::{Ansatz, WordCircuitTable};
use qembed_core::EmbeddingMode;

use crate::error::{Error, IoContext, Result};

pub const EMBEDDING_MAGIC: &[u8; 4] = b"CWV1";
pub const PQC_MAGIC: &[u8; 4] = b"PQC1";
const MAX_WORD_BYTES: u32 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingFormat {
    Binary,
    Text,
}

impl std::str::FromStr for EmbeddingFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary" | "bin" => Ok(EmbeddingFormat::Binary),
            "text" | "txt" => Ok(EmbeddingFormat::Text),
            _ => Err(format!("unknown format '{s}' (binary|text)")),
        }
    }
}

/// Words with one embedding row each.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub words: Vec<String>,
    pub table: EmbeddingTable,
}

impl EmbeddingFile {
    pub fn new(words: Vec<String>, table: EmbeddingTable) -> Result<Self> {
        if words.len() != table.rows() {
            return Err(qembed_core::Error::DimensionMismatch(words.len(), table.rows()).into());
        }
        Ok(EmbeddingFile { words, table })
    }

    /// Reads real-mode files as complex with zero imaginary parts.
    pub fn into_complex(self) -> Self {
        EmbeddingFile {
            words: self.words,
            table: self.table.into_complex(),
        }
    }
}

/// Words with one angle row each.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcFile {
    pub words: Vec<String>,
    pub table: WordCircuitTable,
}

impl PqcFile {
    pub fn new(words: Vec<String>, table: WordCircuitTable) -> Result<Self> {
        if words.len() != table.rows() {
            return Err(qembed_core::Error::DimensionMismatch(words.len(), table.rows()).into());
        }
        Ok(PqcFile { words, table })
    }
}

/// Any model file, recognised by its first bytes.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Embeddings(EmbeddingFile),
    Circuits(PqcFile),
}

fn truncated() -> Error {
    Error::Format("truncated file".into())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => truncated(),
        _ => Error::RawIo(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    read_exact(r, &mut b)?;
    Ok(b[0])
}

fn read_f32s<R: Read>(r: &mut R, out: &mut [f32]) -> Result<()> {
    let mut b = vec![0u8; out.len() * 4];
    read_exact(r, &mut b)?;
    for (x, c) in out.iter_mut().zip(b.chunks_exact(4)) {
        *x = f32::from_le_bytes(c.try_into().unwrap());
    }
    Ok(())
}

fn write_f32s<W: Write>(w: &mut W, xs: &[f32]) -> Result<()> {
    let mut b = Vec::with_capacity(xs.len() * 4);
    for x in xs {
        b.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&b)?;
    Ok(())
}

fn write_words<W: Write>(w: &mut W, words: &[String]) -> Result<()> {
    for word in words {
        w.write_all(&(word.len() as u32).to_le_bytes())?;
        w.write_all(word.as_bytes())?;
    }
    Ok(())
}

fn read_words<R: Read>(r: &mut R, n: usize) -> Result<Vec<String>> {
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        let len = read_u32(r)?;
        if len > MAX_WORD_BYTES {
            return Err(Error::Format(format!("word length {len} too large")));
        }
        let mut b = vec![0u8; len as usize];
        read_exact(r, &mut b)?;
        words.push(String::from_utf8(b).map_err(|_| Error::Format("word is not UTF-8".into()))?);
    }
    Ok(words)
}

fn expect_end<R: Read>(r: &mut R) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after word list".into())),
    }
}

fn mode_byte(mode: EmbeddingMode) -> u8 {
    match mode {
        EmbeddingMode::Real => 0,
        EmbeddingMode::Complex => 1,
    }
}

pub fn write_binary<W: Write>(file: &EmbeddingFile, mut w: W) -> Result<()> {
    let t = &file.table;
    w.write_all(EMBEDDING_MAGIC)?;
    w.write_all(&(t.rows() as u32).to_le_bytes())?;
    w.write_all(&(t.dim() as u32).to_le_bytes())?;
    w.write_all(&[mode_byte(t.mode())])?;
    for i in 0..t.rows() {
        write_f32s(&mut w, t.row_re(i))?;
        if t.mode() == EmbeddingMode::Complex {
            write_f32s(&mut w, t.row_im(i))?;
        }
    }
    write_words(&mut w, &file.words)?;
    w.flush()?;
    Ok(())
}

/// Reads a binary embedding file, magic included.
pub fn read_binary<R: Read>(mut r: R) -> Result<EmbeddingFile> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != EMBEDDING_MAGIC {
        return Err(Error::Format(
            "not a CWV1 embedding file (bad magic or version)".into(),
        ));
    }
    read_binary_body(r)
}

fn read_binary_body<R: Read>(mut r: R) -> Result<EmbeddingFile> {
    let rows = read_u32(&mut r)? as usize;
    let dim = read_u32(&mut r)? as usize;
    let mode = match read_u8(&mut r)? {
        0 => EmbeddingMode::Real,
        1 => EmbeddingMode::Complex,
        m => return Err(Error::Format(format!("unknown mode byte {m}"))),
    };
    if dim == 0 {
        return Err(Error::Format("zero dimension".into()));
    }
    let mut re = vec![0f32; rows * dim];
    let mut im = vec![0f32; rows * dim];
    for i in 0..rows {
        read_f32s(&mut r, &mut re[i * dim..(i + 1) * dim])?;
        if mode == EmbeddingMode::Complex {
            read_f32s(&mut r, &mut im[i * dim..(i + 1) * dim])?;
        }
    }
    let words = read_words(&mut r, rows)?;
    expect_end(&mut r)?;
    EmbeddingFile::new(words, EmbeddingTable::from_parts(dim, mode, re, im)?)
}

pub fn write_text<W: Write>(file: &EmbeddingFile, mut w: W) -> Result<()> {
    let t = &file.table;
    writeln!(w, "{} {} {}", t.rows(), t.dim(), t.mode().as_str())?;
    let mut line = String::new();
    for (i, word) in file.words.iter().enumerate() {
        use std::fmt::Write as _;
        line.clear();
        line.push_str(word);
        for x in t.row_re(i) {
            write!(line, " {x}").unwrap();
        }
        if t.mode() == EmbeddingMode::Complex {
            for x in t.row_im(i) {
                write!(line, " {x}").unwrap();
            }
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_text<R: BufRead>(r: R) -> Result<EmbeddingFile> {
    let mut lines = r.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(truncated()),
    };
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let h: Vec<&str> = header.split_whitespace().collect();
    let (rows, dim, mode) = match h.as_slice() {
        [r, d, m] => (
            r.parse::<usize>()
                .map_err(|_| parse_err(1, "bad row count".into()))?,
            d.parse::<usize>()
                .map_err(|_| parse_err(1, "bad dimension".into()))?,
            EmbeddingMode::parse(m).ok_or_else(|| parse_err(1, format!("unknown mode '{m}'")))?,
        ),
        _ => return Err(parse_err(1, "expected header 'rows dim mode'".into())),
    };
    let width = match mode {
        EmbeddingMode::Real => dim,
        EmbeddingMode::Complex => 2 * dim,
    };
    let mut words = Vec::with_capacity(rows);
    let mut re = Vec::with_capacity(rows * dim);
    let mut im = Vec::with_capacity(rows * dim);
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(' ');
        let word = it.next().unwrap_or_default().to_string();
        let vals: Vec<f32> = it
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(i + 1, "unparseable float".into()))?;
        if vals.len() != width {
            return Err(parse_err(
                i + 1,
                format!("expected {width} values, found {}", vals.len()),
            ));
        }
        re.extend_from_slice(&vals[..dim]);
        match mode {
            EmbeddingMode::Real => im.extend(std::iter::repeat_n(0.0, dim)),
            EmbeddingMode::Complex => im.extend_from_slice(&vals[dim..]),
        }
        words.push(word);
    }
    if words.len() != rows {
        return Err(Error::Format(format!(
            "header promises {rows} rows, found {}",
            words.len()
        )));
    }
    EmbeddingFile::new(words, EmbeddingTable::from_parts(dim, mode, re, im)?)
}

pub fn write_pqc<W: Write>(file: &PqcFile, mut w: W) -> Result<()> {
    let a = file.table.ansatz();
    let id = a.id().as_bytes();
    if id.len() > u8::MAX as usize {
        return Err(Error::Format("ansatz id too long".into()));
    }
    w.write_all(PQC_MAGIC)?;
    w.write_all(&[id.len() as u8])?;
    w.write_all(id)?;
    for x in [a.n_qubits(), a.n_layers(), file.table.rows()] {
        w.write_all(&(x as u32).to_le_bytes())?;
    }
    let mut b = Vec::with_capacity(file.table.angles().len() * 8);
    for x in file.table.angles() {
        b.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&b)?;
    write_words(&mut w, &file.words)?;
    w.flush()?;
    Ok(())
}

pub fn read_pqc<R: Read>(mut r: R) -> Result<PqcFile> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != PQC_MAGIC {
        return Err(Error::Format(
            "not a PQC1 parameter file (bad magic or version)".into(),
        ));
    }
    read_pqc_body(r)
}

fn read_pqc_body<R: Read>(mut r: R) -> Result<PqcFile> {
    let len = read_u8(&mut r)? as usize;
    let mut id = vec![0u8; len];
    read_exact(&mut r, &mut id)?;
    let id = String::from_utf8(id).map_err(|_| Error::Format("ansatz id is not UTF-8".into()))?;
    let n_qubits = read_u32(&mut r)? as usize;
    let n_layers = read_u32(&mut r)? as usize;
    let rows = read_u32(&mut r)? as usize;
    let ansatz = Ansatz::catalog(&id, n_qubits, n_layers)?;
    let mut b = vec![0u8; rows * ansatz.param_count() * 8];
    read_exact(&mut r, &mut b)?;
    let angles = b
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let words = read_words(&mut r, rows)?;
    expect_end(&mut r)?;
    PqcFile::new(words, WordCircuitTable::new(ansatz, angles)?)
}

/// Reads any model file: binary or text embeddings, or circuit parameters.
pub fn read_model<R: BufRead>(mut r: R) -> Result<ModelFile> {
    let head = r.fill_buf()?;
    if head.starts_with(EMBEDDING_MAGIC) {
        return Ok(ModelFile::Embeddings(read_binary(r)?));
    }
    if head.starts_with(PQC_MAGIC) {
        return Ok(ModelFile::Circuits(read_pqc(r)?));
    }
    Ok(ModelFile::Embeddings(read_text(r)?))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let f = File::open(path).at(path)?;
    read_model(BufReader::new(f)).map_err(|e| with_path(e, path))
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingFile> {
    match load_model(path)? {
        ModelFile::Embeddings(e) => Ok(e),
        ModelFile::Circuits(_) => Err(Error::Format(format!(
            "{}: expected embeddings, found circuit parameters",
            path.display()
        ))),
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        Error::Parse { line, message } => {
            Error::Format(format!("{}:{line}: {message}", path.display()))
        }
        other => other,
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let file = File::create(path).at(path)?;
    let mut w = BufWriter::new(file);
    f(&mut w)?;
    w.flush().at(path)
}

/// Writes, then reads back and compares.
pub fn save_embeddings(file: &EmbeddingFile, path: &Path, format: EmbeddingFormat) -> Result<()> {
    write_file(path, |w| match format {
        EmbeddingFormat::Binary => write_binary(file, w),
        EmbeddingFormat::Text => write_text(file, w),
    })?;
    let back = load_embeddings(path)?;
    let same = match format {
        EmbeddingFormat::Binary => back == *file,
        EmbeddingFormat::Text => back.words == file.words && back.table.mode() == file.table.mode(),
    };
    if !same {
        return Err(Error::Format(format!(
            "{}: write verification failed",
            path.display()
        )));
    }
    Ok(())
}

/// Writes, then reads back and compares.
pub fn save_pqc(file: &PqcFile, path: &Path) -> Result<()> {
    write_file(path, |w| write_pqc(file, w))?;
    match load_model(path)? {
        ModelFile::Circuits(back) if back == *file => Ok(()),
        _ => Err(Error::Format(format!(
            "{}: write verification failed",
            path.display()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(mode: EmbeddingMode) -> EmbeddingFile {
        let im = match mode {
            EmbeddingMode::Real => vec![0.0; 6],
            EmbeddingMode::Complex => vec![0.5, -1.5, 1e-7, 3.0, -0.0, 2.25],
        };
        let t = EmbeddingTable::from_parts(3, mode, vec![0.1, -0.2, 0.3, 1e-30, 7.0, -8.5], im)
            .unwrap();
        EmbeddingFile::new(vec!["king".into(), "köln".into()], t).unwrap()
    }

    #[test]
    fn binary_round_trip_is_byte_identical() {
        for mode in [EmbeddingMode::Real, EmbeddingMode::Complex] {
            let f = sample(mode);
            let mut a = Vec::new();
            write_binary(&f, &mut a).unwrap();
            let back = read_binary(&a[..]).unwrap();
            assert_eq!(back, f);
            let mut b = Vec::new();
            write_binary(&back, &mut b).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn binary_layout() {
        let mut a = Vec::new();
        write_binary(&sample(EmbeddingMode::Complex), &mut a).unwrap();
        assert_eq!(&a[..4], b"CWV1");
        assert_eq!(u32::from_le_bytes(a[4..8].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(a[8..12].try_into().unwrap()), 3);
        assert_eq!(a[12], 1);
        // second row, first imaginary part
        let off = 13 + 4 * 6 + 4 * 3;
        assert_eq!(f32::from_le_bytes(a[off..off + 4].try_into().unwrap()), 3.0);
        assert_eq!(a.len(), 13 + 4 * 12 + (4 + 4) + (4 + "köln".len()));
    }

    #[test]
    fn text_round_trip() {
        for mode in [EmbeddingMode::Real, EmbeddingMode::Complex] {
            let f = sample(mode);
            let mut a = Vec::new();
            write_text(&f, &mut a).unwrap();
            let back = read_text(&a[..]).unwrap();
            assert_eq!(back.words, f.words);
            for (x, y) in back
                .table
                .re()
                .iter()
                .chain(back.table.im())
                .zip(f.table.re().iter().chain(f.table.im()))
            {
                assert!((x - y).abs() <= 1e-6);
            }
        }
        let mut a = Vec::new();
        write_text(&sample(EmbeddingMode::Complex), &mut a).unwrap();
        assert!(String::from_utf8(a).unwrap().starts_with("2 3 complex\n"));
    }

    #[test]
    fn large_run_header() {
        let t = EmbeddingTable::zeros(426_507, 64, EmbeddingMode::Complex);
        let words = (0..426_507).map(|i| format!("w{i}")).collect();
        let f = EmbeddingFile::new(words, t).unwrap();
        let mut a = Vec::new();
        write_text(&f, &mut a).unwrap();
        let first = a.split(|&b| b == b'\n').next().unwrap();
        assert_eq!(first, b"426507 64 complex");
    }

    #[test]
    fn real_file_read_as_complex() {
        let mut a = Vec::new();
        write_binary(&sample(EmbeddingMode::Real), &mut a).unwrap();
        let c = read_binary(&a[..]).unwrap().into_complex();
        assert_eq!(c.table.mode(), EmbeddingMode::Complex);
        assert!(c.table.im().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut a = Vec::new();
        write_binary(&sample(EmbeddingMode::Complex), &mut a).unwrap();
        let mut bad = a.clone();
        bad[3] = b'2';
        assert!(matches!(read_binary(&bad[..]), Err(Error::Format(_))));
        for cut in [2, 12, 20, a.len() - 1] {
            assert!(
                matches!(read_binary(&a[..cut]), Err(Error::Format(_))),
                "cut {cut}"
            );
        }
        let mut long = a.clone();
        long.push(0);
        assert!(read_binary(&long[..]).is_err());
    }

    #[test]
    fn pqc_round_trip() {
        let a = Ansatz::catalog("A14", 2, 2).unwrap();
        let angles: Vec<f64> = (0..2 * a.param_count())
            .map(|i| i as f64 * 0.37 - 1.0)
            .collect();
        let f = PqcFile::new(
            vec!["a".into(), "b".into()],
            WordCircuitTable::new(a, angles).unwrap(),
        )
        .unwrap();
        let mut x = Vec::new();
        write_pqc(&f, &mut x).unwrap();
        let back = match read_model(&x[..]).unwrap() {
            ModelFile::Circuits(p) => p,
            _ => panic!("wrong kind"),
        };
        assert_eq!(back, f);
        let mut y = Vec::new();
        write_pqc(&back, &mut y).unwrap();
        assert_eq!(x, y);
        assert!(read_pqc(&x[..x.len() - 3]).is_err());
    }
}
