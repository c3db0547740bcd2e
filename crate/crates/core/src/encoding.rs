//! Canonical byte encoding used for hashing, signing and transcript files.
//!
//! A record is a sequence of fields in a fixed order. Every field is written
//! as a big-endian `u32` length followed by its content. Group elements and
//! scalars are fixed-width big-endian integers sized to `p` and `q`; integers
//! are 8-byte big-endian; lists are a `u64` count followed by their items.

use crate::error::DecodeError;
use crate::group::{GroupElement, GroupParams, Scalar};

pub struct Encoder<'a> {
    params: &'a GroupParams,
    buf: Vec<u8>,
}

impl<'a> Encoder<'a> {
    pub fn new(params: &'a GroupParams) -> Self {
        Encoder { params, buf: Vec::new() }
    }

    pub fn params(&self) -> &'a GroupParams {
        self.params
    }

    pub fn bytes(&mut self, field: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(&(field.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(field);
        self
    }

    pub fn str(&mut self, field: &str) -> &mut Self {
        self.bytes(field.as_bytes())
    }

    pub fn u64(&mut self, field: u64) -> &mut Self {
        self.bytes(&field.to_be_bytes())
    }

    pub fn element(&mut self, x: &GroupElement) -> &mut Self {
        let bytes = self.params.element_to_bytes(x);
        self.bytes(&bytes)
    }

    pub fn scalar(&mut self, x: &Scalar) -> &mut Self {
        let bytes = self.params.scalar_to_bytes(x);
        self.bytes(&bytes)
    }

    pub fn list<T>(&mut self, items: &[T], mut each: impl FnMut(&mut Self, &T)) -> &mut Self {
        self.u64(items.len() as u64);
        for item in items {
            each(self, item);
        }
        self
    }

    pub fn record<T: Canonical>(&mut self, item: &T) -> &mut Self {
        item.encode(self);
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Decoder<'a> {
    params: &'a GroupParams,
    data: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(params: &'a GroupParams, data: &'a [u8]) -> Self {
        Decoder { params, data, pos: 0 }
    }

    pub fn params(&self) -> &'a GroupParams {
        self.params
    }

    pub fn offset(&self) -> usize {
        self.pos
    }

    fn err(&self, reason: impl Into<String>) -> DecodeError {
        DecodeError::new(self.pos, reason)
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], DecodeError> {
        let rest = &self.data[self.pos..];
        if rest.len() < 4 {
            return Err(self.err("truncated length prefix"));
        }
        let len = u32::from_be_bytes(rest[..4].try_into().unwrap()) as usize;
        if rest.len() - 4 < len {
            return Err(self.err(format!("field of {len} bytes overruns record")));
        }
        self.pos += 4;
        let field = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(field)
    }

    pub fn str(&mut self) -> Result<String, DecodeError> {
        let start = self.pos;
        let raw = self.bytes()?;
        String::from_utf8(raw.to_vec()).map_err(|_| DecodeError::new(start, "invalid utf-8"))
    }

    pub fn u64(&mut self) -> Result<u64, DecodeError> {
        let start = self.pos;
        let raw = self.bytes()?;
        let arr: [u8; 8] = raw
            .try_into()
            .map_err(|_| DecodeError::new(start, "integer field is not 8 bytes"))?;
        Ok(u64::from_be_bytes(arr))
    }

    pub fn usize(&mut self) -> Result<usize, DecodeError> {
        let start = self.pos;
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| DecodeError::new(start, "integer overflows usize"))
    }

    pub fn element(&mut self) -> Result<GroupElement, DecodeError> {
        let start = self.pos;
        let raw = self.bytes()?;
        self.params
            .element_from_bytes(raw)
            .map_err(|e| DecodeError::new(start, e.to_string()))
    }

    pub fn scalar(&mut self) -> Result<Scalar, DecodeError> {
        let start = self.pos;
        let raw = self.bytes()?;
        self.params
            .scalar_from_bytes(raw)
            .map_err(|e| DecodeError::new(start, e.to_string()))
    }

    pub fn list<T>(
        &mut self,
        mut each: impl FnMut(&mut Self) -> Result<T, DecodeError>,
    ) -> Result<Vec<T>, DecodeError> {
        let start = self.pos;
        let count = self.usize()?;
        // every item occupies at least one length prefix
        if count > (self.data.len() - self.pos) / 4 + 1 {
            return Err(DecodeError::new(start, "list count exceeds record size"));
        }
        (0..count).map(|_| each(self)).collect()
    }

    pub fn record<T: Canonical>(&mut self) -> Result<T, DecodeError> {
        T::decode(self)
    }

    pub fn expect_tag(&mut self, tag: &str) -> Result<(), DecodeError> {
        let start = self.pos;
        let got = self.bytes()?;
        if got != tag.as_bytes() {
            return Err(DecodeError::new(start, format!("expected record tag `{tag}`")));
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(), DecodeError> {
        if self.pos != self.data.len() {
            return Err(self.err("trailing bytes after record"));
        }
        Ok(())
    }
}

/// Types with a canonical encoding.
pub trait Canonical: Sized {
    fn encode(&self, enc: &mut Encoder<'_>);
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, DecodeError>;

    fn to_canonical(&self, params: &GroupParams) -> Vec<u8> {
        let mut enc = Encoder::new(params);
        self.encode(&mut enc);
        enc.finish()
    }

    fn from_canonical(params: &GroupParams, data: &[u8]) -> Result<Self, DecodeError> {
        let mut dec = Decoder::new(params, data);
        let value = Self::decode(&mut dec)?;
        dec.finish()?;
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupPreset;

    #[test]
    fn layout_is_length_prefixed() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut enc = Encoder::new(&params);
        enc.str("ab").u64(1).element(&params.generator());
        let bytes = enc.finish();
        assert_eq!(
            bytes,
            vec![0, 0, 0, 2, b'a', b'b', 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2, 0, 4]
        );
        let mut dec = Decoder::new(&params, &bytes);
        assert_eq!(dec.str().unwrap(), "ab");
        assert_eq!(dec.u64().unwrap(), 1);
        assert_eq!(dec.element().unwrap(), params.generator());
        dec.finish().unwrap();
    }

    #[test]
    fn errors_carry_offsets() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut enc = Encoder::new(&params);
        enc.str("ab").bytes(&[0, 5]);
        let bytes = enc.finish();
        let mut dec = Decoder::new(&params, &bytes);
        dec.str().unwrap();
        // 5 is not a quadratic residue mod 65267
        assert_eq!(dec.element().unwrap_err().offset, 6);

        let mut dec = Decoder::new(&params, &bytes[..7]);
        dec.str().unwrap();
        assert_eq!(dec.bytes().unwrap_err().offset, 6);

        let mut dec = Decoder::new(&params, &bytes);
        dec.str().unwrap();
        assert_eq!(dec.finish().unwrap_err().offset, 6);
    }

    #[test]
    fn hostile_list_count_is_rejected() {
        let params = GroupParams::preset(GroupPreset::Test16);
        let mut enc = Encoder::new(&params);
        enc.u64(u64::MAX >> 8);
        let bytes = enc.finish();
        let mut dec = Decoder::new(&params, &bytes);
        assert!(dec.list(|d| d.u64()).is_err());
    }
}
