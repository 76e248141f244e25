use rand::Rng;

pub const TOKEN_LEN: usize = 11;

const ALPHABET: &[u8; 62] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// A fresh 11-character base62 token from the thread-local CSPRNG.
pub fn new_token() -> String {
    let mut rng = rand::rng();
    (0..TOKEN_LEN)
        .map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char)
        .collect()
}

pub fn is_token(s: &str) -> bool {
    s.len() == TOKEN_LEN && s.bytes().all(|b| b.is_ascii_alphanumeric())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn shape_and_spread() {
        let toks: HashSet<String> = (0..2000).map(|_| new_token()).collect();
        assert_eq!(toks.len(), 2000);
        assert!(toks.iter().all(|t| is_token(t)));
        let used: HashSet<char> = toks.iter().flat_map(|t| t.chars()).collect();
        assert_eq!(used.len(), 62);
    }
}
