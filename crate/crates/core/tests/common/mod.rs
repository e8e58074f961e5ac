//! Test-only oracles, kept independent of the library's implementations.

#![allow(dead_code)]

pub mod reference_lzw {
    use std::collections::HashMap;

    /// String-keyed LZW over {'0','1'}: returns (codes, widths).
    pub fn encode(bits: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let text: String = bits.iter().map(|b| if *b { '1' } else { '0' }).collect();
        let mut dict: HashMap<String, usize> = HashMap::new();
        dict.insert("0".to_string(), 0);
        dict.insert("1".to_string(), 1);
        let mut codes = Vec::new();
        let mut widths = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            let mut candidate = current.clone();
            candidate.push(ch);
            if dict.contains_key(&candidate) {
                current = candidate;
            } else {
                codes.push(dict[&current]);
                widths.push(width(dict.len()));
                let next = dict.len();
                dict.insert(candidate, next);
                current = ch.to_string();
            }
        }
        if !current.is_empty() {
            codes.push(dict[&current]);
            widths.push(width(dict.len()));
        }
        (codes, widths)
    }

    /// ceil(log2(n)) by repeated doubling.
    pub fn width(n: usize) -> usize {
        let mut w = 0;
        while (1usize << w) < n {
            w += 1;
        }
        w
    }

    /// Total charged size.
    pub fn compressed_bits(bits: &[bool]) -> usize {
        encode(bits).1.iter().sum()
    }

    /// Serializes codes MSB-first at their widths.
    pub fn pack(codes: &[usize], widths: &[usize]) -> Vec<bool> {
        let mut out = Vec::new();
        for (&c, &w) in codes.iter().zip(widths) {
            for i in (0..w).rev() {
                out.push((c >> i) & 1 == 1);
            }
        }
        out
    }

    /// Decoder that rebuilds the dictionary and reads variable-width codes.
    pub fn decode(packed: &[bool], num_codes: usize) -> Vec<bool> {
        let mut dict: Vec<Vec<bool>> = vec![vec![false], vec![true]];
        let mut pos = 0;
        let read = |w: usize, pos: &mut usize| -> usize {
            let mut v = 0;
            for _ in 0..w {
                v = (v << 1) | packed[*pos] as usize;
                *pos += 1;
            }
            v
        };
        let mut out = Vec::new();
        let mut prev: Option<Vec<bool>> = None;
        for _ in 0..num_codes {
            // The encoder's dictionary is one entry ahead of ours after the first code.
            let size = if prev.is_some() { dict.len() + 1 } else { dict.len() };
            let code = read(width(size), &mut pos);
            let entry = if code < dict.len() {
                dict[code].clone()
            } else {
                let mut p = prev.clone().expect("KwKwK case needs a previous phrase");
                p.push(p[0]);
                p
            };
            if let Some(mut p) = prev.take() {
                p.push(entry[0]);
                dict.push(p);
            }
            out.extend_from_slice(&entry);
            prev = Some(entry);
        }
        assert_eq!(pos, packed.len(), "trailing bits");
        out
    }
}
