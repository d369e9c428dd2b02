//! The original Porter stemmer for English, in its Snowball formulation
//! (R1/R2 regions rather than the measure function).

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn ends(w: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    n <= w.len() && w[w.len() - n..].iter().copied().eq(suffix.chars())
}

fn replace(w: &mut Vec<char>, suffix_len: usize, with: &str) {
    w.truncate(w.len() - suffix_len);
    w.extend(with.chars());
}

/// Consonant-vowel-consonant at the end, where the final consonant is not
/// w, x or Y.
fn short_syllable(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && !is_vowel(w[n - 1])
        && !matches!(w[n - 1], 'w' | 'x' | 'Y')
        && is_vowel(w[n - 2])
        && !is_vowel(w[n - 3])
}

fn has_vowel(w: &[char]) -> bool {
    w.iter().any(|&c| is_vowel(c))
}

/// Start of the region after the first non-vowel following a vowel,
/// searching from `from`.
fn region_start(w: &[char], from: usize) -> usize {
    let mut i = from;
    while i < w.len() && !is_vowel(w[i]) {
        i += 1;
    }
    while i < w.len() && is_vowel(w[i]) {
        i += 1;
    }
    if i < w.len() {
        i + 1
    } else {
        w.len()
    }
}

/// Longest suffix of `w` found in `table`.
fn longest<'a>(w: &[char], table: &'a [(&'a str, &'a str)]) -> Option<(usize, &'a str)> {
    table
        .iter()
        .filter(|(s, _)| ends(w, s))
        .map(|(s, r)| (s.len(), *r))
        .max_by_key(|(len, _)| *len)
}

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

const STEP4: &[(&str, &str)] = &[
    ("al", ""),
    ("ance", ""),
    ("ence", ""),
    ("er", ""),
    ("ic", ""),
    ("able", ""),
    ("ible", ""),
    ("ant", ""),
    ("ement", ""),
    ("ment", ""),
    ("ent", ""),
    ("ion", ""),
    ("ou", ""),
    ("ism", ""),
    ("ate", ""),
    ("iti", ""),
    ("ous", ""),
    ("ive", ""),
    ("ize", ""),
];

/// Stems a lowercase English word.
pub fn porter_stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    // y acting as a consonant
    let mut marked = false;
    for i in 0..w.len() {
        if w[i] == 'y' && (i == 0 || is_vowel(w[i - 1])) {
            w[i] = 'Y';
            marked = true;
        }
    }
    let p1 = region_start(&w, 0);
    let p2 = region_start(&w, p1);

    // 1a
    if ends(&w, "sses") {
        replace(&mut w, 4, "ss");
    } else if ends(&w, "ies") {
        replace(&mut w, 3, "i");
    } else if !ends(&w, "ss") && ends(&w, "s") {
        w.pop();
    }

    // 1b
    if ends(&w, "eed") {
        if w.len() - 3 >= p1 {
            w.pop();
        }
    } else {
        let cut = if ends(&w, "ed") {
            2
        } else if ends(&w, "ing") {
            3
        } else {
            0
        };
        if cut > 0 && has_vowel(&w[..w.len() - cut]) {
            w.truncate(w.len() - cut);
            let n = w.len();
            if ends(&w, "at") || ends(&w, "bl") || ends(&w, "iz") {
                w.push('e');
            } else if n >= 2 && w[n - 1] == w[n - 2] && "bdfgmnprt".contains(w[n - 1]) {
                w.pop();
            } else if n == p1 && short_syllable(&w) {
                w.push('e');
            }
        }
    }

    // 1c
    if let Some(&last) = w.last() {
        if (last == 'y' || last == 'Y') && has_vowel(&w[..w.len() - 1]) {
            *w.last_mut().unwrap() = 'i';
        }
    }

    // 2, 3
    for table in [STEP2, STEP3] {
        if let Some((len, with)) = longest(&w, table) {
            if w.len() - len >= p1 {
                replace(&mut w, len, with);
            }
        }
    }

    // 4
    if let Some((len, _)) = longest(&w, STEP4) {
        let start = w.len() - len;
        if start >= p2
            && (len != 3 || !ends(&w, "ion") || (start > 0 && matches!(w[start - 1], 's' | 't')))
        {
            w.truncate(start);
        }
    }

    // 5a
    if ends(&w, "e") {
        let pos = w.len() - 1;
        if pos >= p2 || (pos >= p1 && !short_syllable(&w[..pos])) {
            w.pop();
        }
    }

    // 5b
    let n = w.len();
    if n >= 2 && w[n - 1] == 'l' && n > p2 && w[n - 2] == 'l' {
        w.pop();
    }

    if marked {
        for c in &mut w {
            if *c == 'Y' {
                *c = 'y';
            }
        }
    }
    w.into_iter().collect()
}
