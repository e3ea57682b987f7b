use std::cmp::Ordering;
use std::fmt;

use super::GroupError;

/// One syllable `g^k` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub gen: u16,
    pub exp: i32,
}

/// A product of generator powers, read left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Syllable>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.0
    }

    /// Number of generator letters, counting `g^k` as `|k|` letters.
    pub fn letter_length(&self) -> u64 {
        self.0.iter().map(|s| s.exp.unsigned_abs() as u64).sum()
    }

    pub fn last_gen(&self) -> Option<u16> {
        self.0.last().map(|s| s.gen)
    }

    pub fn first_gen(&self) -> Option<u16> {
        self.0.first().map(|s| s.gen)
    }

    pub fn with(&self, s: Syllable) -> Word {
        let mut w = Vec::with_capacity(self.0.len() + 1);
        w.extend_from_slice(&self.0);
        w.push(s);
        Word(w)
    }

    /// Appends `g^k`, merging with a trailing syllable of the same generator
    /// and reducing exponents modulo a finite `order`.
    pub fn push_reduced(&mut self, gen: u16, k: i32, order: Option<u32>) {
        let mut exp = k;
        if self.0.last().map(|s| s.gen) == Some(gen) {
            exp += self.0.pop().unwrap().exp;
        }
        if let Some(n) = order {
            exp = canonical_exponent(exp, n);
        }
        if exp != 0 {
            self.0.push(Syllable { gen, exp });
        }
    }

    pub fn inverse(&self) -> Word {
        Word(
            self.0
                .iter()
                .rev()
                .map(|s| Syllable {
                    gen: s.gen,
                    exp: -s.exp,
                })
                .collect(),
        )
    }

    /// Renders with generator names, `e` for the empty word.
    pub fn render(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| {
                let n = names.get(s.gen as usize).map(String::as_str).unwrap_or("?");
                if s.exp == 1 {
                    n.to_string()
                } else {
                    format!("{n}^{}", s.exp)
                }
            })
            .collect();
        parts.join(".")
    }

    /// Parses `p^2.h^-1.s`; `e` is the identity.
    pub fn parse(text: &str, names: &[String]) -> Result<Word, GroupError> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(Word::identity());
        }
        let mut w = Word::identity();
        for part in text.split('.') {
            let (name, exp) = match part.split_once('^') {
                Some((n, e)) => {
                    let e: i32 = e
                        .trim()
                        .parse()
                        .map_err(|_| GroupError::BadWord(text.to_string()))?;
                    (n.trim(), e)
                }
                None => (part.trim(), 1),
            };
            let gen = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| GroupError::UnknownGenerator(name.to_string()))?;
            if exp != 0 {
                w.push_reduced(gen as u16, exp, None);
            }
        }
        Ok(w)
    }

    /// Shortlex order: fewer letters first, then syllables lexicographically.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.letter_length()
            .cmp(&other.letter_length())
            .then_with(|| self.0.len().cmp(&other.0.len()))
            .then_with(|| {
                for (a, b) in self.0.iter().zip(&other.0) {
                    let c = a.gen.cmp(&b.gen).then(a.exp.cmp(&b.exp));
                    if c != Ordering::Equal {
                        return c;
                    }
                }
                Ordering::Equal
            })
    }
}

/// Representative of `k mod n` in `(-n/2, n/2]`, zero allowed.
pub fn canonical_exponent(k: i32, n: u32) -> i32 {
    let n = n as i32;
    let mut r = k.rem_euclid(n);
    if r > n / 2 {
        r -= n;
    }
    r
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| format!("g{}^{}", s.gen, s.exp))
            .collect();
        write!(f, "{}", parts.join("."))
    }
}
