//! "Count Your Chickens!"-style boards and their compilation into chains.
//!
//! A board has `N + 1` squares numbered from 1. Square 1 is the start, the
//! last square is the terminal and matches every animal. Each spin picks one
//! of `K` animals or the fox, all equally likely. An animal moves the token to
//! the next square carrying that animal and pays one chick per square moved,
//! plus one if the landing square is blue. The fox costs a chick (never going
//! below zero) and the token stays put. The game is won with at least `N`
//! chicks at the terminal.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::Deserialize;
use thiserror::Error;

use crate::chain::{Edge, WeightedMarkovChain};
use crate::poly::Support;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    Empty,
    Animal(String),
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    /// `squares[0]` is square 1.
    pub squares: Vec<Label>,
    pub animals: Vec<String>,
    pub blue: BTreeSet<usize>,
    pub win_threshold: i64,
}

/// A problem with a game description, located by JSON position or by the
/// offending board entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl Diagnostic {
    fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { location: location.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game spec:\n{}", .0.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("unknown builtin game {0:?} (expected \"simplified\" or \"full\")")]
    UnknownBuiltin(String),
    #[error("square {0} is not a non-terminal square of the board")]
    NotPlayable(usize),
    #[error("unknown animal {0:?}")]
    UnknownAnimal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Merge animal edges that share a destination (and hence a weight).
    pub merge_parallel: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { merge_parallel: true }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    #[serde(default)]
    animals: Option<Vec<String>>,
    board: RawBoard,
    #[serde(default)]
    blue: Vec<i64>,
    #[serde(default)]
    win_threshold: Option<i64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawBoard {
    List(Vec<String>),
    /// Compact notation such as `"[0,0,S,P,...,{C,D,P,S,T}]"`.
    Compact(String),
}

enum Token {
    Empty,
    Terminal(Option<Vec<String>>),
    Animal(String),
}

fn classify(entry: &str) -> Token {
    let entry = entry.trim();
    match entry {
        "" | "0" | "EMPTY" | "START" => Token::Empty,
        "*" => Token::Terminal(None),
        _ if entry.starts_with('{') && entry.ends_with('}') => {
            let inner = &entry[1..entry.len() - 1];
            Token::Terminal(Some(
                inner.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
            ))
        }
        _ => Token::Animal(entry.to_string()),
    }
}

/// Splits on commas outside braces, dropping one pair of outer brackets.
fn split_compact(board: &str) -> Vec<String> {
    let board = board.trim();
    let board = board
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .unwrap_or(board);
    let mut entries = Vec::new();
    let mut current = String::new();
    let mut depth = 0usize;
    for ch in board.chars() {
        match ch {
            '{' => {
                depth += 1;
                current.push(ch);
            }
            '}' => {
                depth = depth.saturating_sub(1);
                current.push(ch);
            }
            ',' if depth == 0 => entries.push(std::mem::take(&mut current).trim().to_string()),
            _ => current.push(ch),
        }
    }
    if !current.trim().is_empty() || !entries.is_empty() {
        entries.push(current.trim().to_string());
    }
    entries
}

/// Parses and validates a JSON game description.
///
/// `board` is either an array of tags or a compact comma-separated string.
/// `"0"`, `"EMPTY"` and `"START"` mark empty squares; `"*"` or a braced set
/// such as `"{C,D}"` marks the terminal. An array without a terminal entry
/// gets one appended; the compact string must spell it out.
pub fn parse_game_spec(text: &str) -> Result<GameSpec, GameError> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| {
        GameError::Invalid(vec![Diagnostic::new(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )])
    })?;
    let mut diags = Vec::new();

    let (entries, implicit_terminal) = match raw.board {
        RawBoard::List(list) => (list, true),
        RawBoard::Compact(text) => (split_compact(&text), false),
    };
    let mut tokens: Vec<Token> = entries.iter().map(|e| classify(e)).collect();
    let has_terminal_last = matches!(tokens.last(), Some(Token::Terminal(_)));
    if !has_terminal_last {
        if implicit_terminal {
            tokens.push(Token::Terminal(None));
        } else {
            diags.push(Diagnostic::new("board", "missing terminal: the last square must be the terminal"));
        }
    }

    let animals = match raw.animals {
        Some(animals) => animals,
        None => match tokens.last() {
            Some(Token::Terminal(Some(set))) => set.clone(),
            _ => {
                let tags: BTreeSet<String> = tokens
                    .iter()
                    .filter_map(|t| match t {
                        Token::Animal(a) => Some(a.clone()),
                        _ => None,
                    })
                    .collect();
                tags.into_iter().collect()
            }
        },
    };
    if animals.is_empty() {
        diags.push(Diagnostic::new("animals", "at least one animal is required"));
    }
    let mut distinct = BTreeSet::new();
    for (k, animal) in animals.iter().enumerate() {
        if !distinct.insert(animal.as_str()) {
            diags.push(Diagnostic::new(format!("animals[{k}]"), format!("duplicate animal {animal:?}")));
        }
        if matches!(classify(animal), Token::Empty | Token::Terminal(_)) {
            diags.push(Diagnostic::new(format!("animals[{k}]"), format!("{animal:?} is reserved")));
        }
    }

    let last = tokens.len().saturating_sub(1);
    let mut squares = Vec::with_capacity(tokens.len());
    for (k, token) in tokens.into_iter().enumerate() {
        let square = k + 1;
        let location = format!("board[{k}] (square {square})");
        let label = match token {
            Token::Empty => Label::Empty,
            Token::Animal(tag) => {
                if !distinct.contains(tag.as_str()) {
                    diags.push(Diagnostic::new(&location, format!("unknown animal tag {tag:?}")));
                }
                Label::Animal(tag)
            }
            Token::Terminal(set) => {
                if k != last {
                    diags.push(Diagnostic::new(&location, "terminal may only be the last square"));
                }
                if let Some(set) = set {
                    let listed: BTreeSet<&str> = set.iter().map(String::as_str).collect();
                    if listed != distinct {
                        diags.push(Diagnostic::new(&location, "terminal must be labeled by every animal"));
                    }
                }
                Label::Terminal
            }
        };
        if k == 0 && label != Label::Empty {
            diags.push(Diagnostic::new(&location, "the start square must be empty"));
        }
        squares.push(label);
    }

    let n = squares.len() as i64 - 1;
    if n < 1 {
        diags.push(Diagnostic::new("board", "the board needs a start square and a terminal"));
    }

    let mut blue = BTreeSet::new();
    for (k, &b) in raw.blue.iter().enumerate() {
        if b < 2 || b > n + 1 {
            diags.push(Diagnostic::new(
                format!("blue[{k}]"),
                format!("blue square {b} outside 2..={}", n + 1),
            ));
        } else {
            blue.insert(b as usize);
        }
    }

    let win_threshold = raw.win_threshold.unwrap_or(n);
    if win_threshold != n {
        diags.push(Diagnostic::new(
            "win_threshold",
            format!("win threshold {win_threshold} must equal the number of squares minus one ({n})"),
        ));
    }

    if !diags.is_empty() {
        return Err(GameError::Invalid(diags));
    }
    let spec = GameSpec { squares, animals, blue, win_threshold };
    let remaining = spec.validate();
    if remaining.is_empty() {
        Ok(spec)
    } else {
        Err(GameError::Invalid(remaining))
    }
}

const SIMPLIFIED_JSON: &str = include_str!("../games/simplified.json");
const FULL_JSON: &str = include_str!("../games/full.json");

/// The JSON text of a builtin board.
pub fn builtin_json(name: &str) -> Result<&'static str, GameError> {
    match name {
        "simplified" => Ok(SIMPLIFIED_JSON),
        "full" => Ok(FULL_JSON),
        _ => Err(GameError::UnknownBuiltin(name.to_string())),
    }
}

/// `simplified` is the 9-square two-animal board; `full` is the retail
/// 41-square board with five animals.
pub fn builtin_game(name: &str) -> Result<GameSpec, GameError> {
    Ok(parse_game_spec(builtin_json(name)?).expect("builtin boards are valid"))
}

impl GameSpec {
    /// `N`, the index of the last square minus one.
    pub fn n(&self) -> usize {
        self.squares.len() - 1
    }

    pub fn terminal(&self) -> usize {
        self.squares.len()
    }

    pub fn label(&self, square: usize) -> &Label {
        &self.squares[square - 1]
    }

    /// Structural checks on an already-built spec.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        if self.animals.is_empty() {
            diags.push(Diagnostic::new("animals", "at least one animal is required"));
        }
        if self.squares.len() < 2 {
            diags.push(Diagnostic::new("board", "the board needs a start square and a terminal"));
            return diags;
        }
        if self.squares[0] != Label::Empty {
            diags.push(Diagnostic::new("square 1", "the start square must be empty"));
        }
        for (k, label) in self.squares.iter().enumerate() {
            match label {
                Label::Terminal if k + 1 != self.squares.len() => {
                    diags.push(Diagnostic::new(format!("square {}", k + 1), "terminal may only be the last square"))
                }
                Label::Animal(tag) if !self.animals.contains(tag) => {
                    diags.push(Diagnostic::new(format!("square {}", k + 1), format!("unknown animal tag {tag:?}")))
                }
                _ => {}
            }
        }
        if self.squares.last() != Some(&Label::Terminal) {
            diags.push(Diagnostic::new("board", "missing terminal: the last square must be the terminal"));
        }
        for &b in &self.blue {
            if b < 2 || b > self.terminal() {
                diags.push(Diagnostic::new("blue", format!("blue square {b} outside 2..={}", self.terminal())));
            }
        }
        if self.win_threshold != self.n() as i64 {
            diags.push(Diagnostic::new("win_threshold", "must equal the number of squares minus one"));
        }
        diags
    }

    /// Squares that can hold the token: the start and every labeled square
    /// before the terminal.
    pub fn playable_squares(&self) -> Vec<usize> {
        (1..self.terminal())
            .filter(|&i| i == 1 || matches!(self.label(i), Label::Animal(_)))
            .collect()
    }
}

/// The first square after `square` labeled `animal`; the terminal matches all.
pub fn next_location(spec: &GameSpec, square: usize, animal: &str) -> Result<usize, GameError> {
    if square < 1 || square >= spec.terminal() {
        return Err(GameError::NotPlayable(square));
    }
    if !spec.animals.iter().any(|a| a == animal) {
        return Err(GameError::UnknownAnimal(animal.to_string()));
    }
    let found = (square + 1..=spec.terminal()).find(|&j| match spec.label(j) {
        Label::Terminal => true,
        Label::Animal(tag) => tag == animal,
        Label::Empty => false,
    });
    Ok(found.expect("the terminal square matches every animal"))
}

/// Chicks collected moving from `from` to `to`: the distance plus one on blue.
pub fn chick_gain(spec: &GameSpec, from: usize, to: usize) -> i64 {
    let bonus = i64::from(spec.blue.contains(&to));
    to as i64 - from as i64 + bonus
}

pub fn compile_game(spec: &GameSpec) -> Result<WeightedMarkovChain, GameError> {
    compile_game_with(spec, CompileOptions::default())
}

/// Builds the chain whose states are the playable squares plus the terminal.
///
/// Every state carries the fox self-loop (weight −1) and one edge per
/// animal, all with probability `1/(K+1)`.
pub fn compile_game_with(spec: &GameSpec, options: CompileOptions) -> Result<WeightedMarkovChain, GameError> {
    let diags = spec.validate();
    if !diags.is_empty() {
        return Err(GameError::Invalid(diags));
    }
    let spin = Rational::new(BigInt::from(1), BigInt::from(spec.animals.len() + 1));
    let transient = spec.playable_squares();
    let mut edges: Vec<Edge> = Vec::new();
    for &square in &transient {
        let id = square.to_string();
        edges.push(Edge { src: id.clone(), dst: id.clone(), prob: spin.clone(), weight: -1 });
        let first_animal_edge = edges.len();
        for animal in &spec.animals {
            let dst = next_location(spec, square, animal)?;
            let weight = chick_gain(spec, square, dst);
            let dst = dst.to_string();
            let merged = options.merge_parallel
                && edges[first_animal_edge..]
                    .iter_mut()
                    .find(|e| e.dst == dst && e.weight == weight)
                    .map(|e| e.prob += &spin)
                    .is_some();
            if !merged {
                edges.push(Edge { src: id.clone(), dst, prob: spin.clone(), weight });
            }
        }
    }
    let chain = WeightedMarkovChain {
        transient: transient.iter().map(ToString::to_string).collect(),
        absorbing: vec![spec.terminal().to_string()],
        edges,
        support: Support { min: 0, max: spec.win_threshold },
        start: Some("1".to_string()),
        initial_capital: None,
    };
    debug_assert!(chain.validate().is_empty());
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn diagnostics(text: &str) -> Vec<Diagnostic> {
        match parse_game_spec(text) {
            Err(GameError::Invalid(d)) => d,
            other => panic!("expected diagnostics, got {other:?}"),
        }
    }

    #[test]
    fn builtins_parse() {
        let full = builtin_game("full").unwrap();
        assert_eq!(full.n(), 40);
        assert_eq!(full.animals.len(), 5);
        assert_eq!(full.blue, BTreeSet::from([5, 9, 23, 36, 40]));
        assert_eq!(full.win_threshold, 40);

        let simple = builtin_game("simplified").unwrap();
        assert_eq!(simple.n(), 8);
        assert_eq!(simple.animals, vec!["COW", "SHEEP"]);
        assert_eq!(simple.blue, BTreeSet::from([3, 6]));
        assert_eq!(simple.label(3), &Label::Animal("SHEEP".into()));
        assert_eq!(simple.label(9), &Label::Terminal);

        assert!(matches!(builtin_game("x"), Err(GameError::UnknownBuiltin(_))));
    }

    #[test]
    fn compact_board_notation() {
        let text = r#"{"blue": [3, 6],
            "board": "[START,EMPTY,SHEEP,COW,EMPTY,COW,EMPTY,SHEEP,{COW,SHEEP}]"}"#;
        let spec = parse_game_spec(text).unwrap();
        let mut builtin = builtin_game("simplified").unwrap();
        // inferred from the terminal set, which lists COW first as well
        builtin.animals = vec!["COW".into(), "SHEEP".into()];
        assert_eq!(spec, builtin);
    }

    #[test]
    fn compact_board_requires_terminal() {
        let d = diagnostics(r#"{"animals":["C"],"board":"0,C,0","blue":[]}"#);
        assert!(d.iter().any(|d| d.message.contains("missing terminal")), "{d:?}");
    }

    #[test]
    fn explicit_terminal_in_list() {
        let spec = parse_game_spec(r#"{"animals":["C"],"board":["0","C","*"],"blue":[3]}"#).unwrap();
        assert_eq!(spec.n(), 2);
        assert_eq!(spec.blue, BTreeSet::from([3]));
    }

    #[test]
    fn bad_inputs_produce_located_diagnostics() {
        let d = diagnostics(r#"{"animals":["C"],"board":["0","X","C"],"blue":[1, 9]}"#);
        assert!(d.iter().any(|d| d.location == "board[1] (square 2)" && d.message.contains("\"X\"")));
        assert!(d.iter().any(|d| d.location == "blue[0]"));
        assert!(d.iter().any(|d| d.location == "blue[1]"));

        let d = diagnostics(r#"{"animals":["C"],"board":["0","*","C"],"blue":[]}"#);
        assert!(d.iter().any(|d| d.message.contains("last square")));

        let d = diagnostics(r#"{"animals":["C"],"board":["C","C"],"blue":[]}"#);
        assert!(d.iter().any(|d| d.message.contains("start square")));

        let d = diagnostics(r#"{"animals":["C"],"board":["0","C"],"blue":[],"win_threshold":5}"#);
        assert!(d.iter().any(|d| d.location == "win_threshold"));

        let d = diagnostics(r#"{"animals":["C","C"],"board":["0"],"blue":[]}"#);
        assert!(d.iter().any(|d| d.message.contains("duplicate")));

        let d = diagnostics(r#"{"animals":["C"],"board":["0","C"],"blue":[],}"#);
        assert!(d[0].location.starts_with("line 1"));

        let d = diagnostics(r#"{"animals":["C","D"],"board":["0","C","{C}"],"blue":[]}"#);
        assert!(d.iter().any(|d| d.message.contains("every animal")));
    }

    #[test]
    fn next_location_on_simplified_board() {
        let spec = builtin_game("simplified").unwrap();
        assert_eq!(next_location(&spec, 1, "SHEEP").unwrap(), 3);
        assert_eq!(next_location(&spec, 1, "COW").unwrap(), 4);
        assert_eq!(next_location(&spec, 4, "SHEEP").unwrap(), 8);
        assert_eq!(next_location(&spec, 8, "COW").unwrap(), 9);
        assert_eq!(next_location(&spec, 8, "SHEEP").unwrap(), 9);
        assert!(matches!(next_location(&spec, 9, "COW"), Err(GameError::NotPlayable(9))));
        assert!(matches!(next_location(&spec, 1, "PIG"), Err(GameError::UnknownAnimal(_))));
    }

    #[test]
    fn chick_gain_counts_blue_bonus() {
        let spec = builtin_game("simplified").unwrap();
        assert_eq!(chick_gain(&spec, 1, 3), 3);
        assert_eq!(chick_gain(&spec, 4, 6), 3);
        assert_eq!(chick_gain(&spec, 6, 8), 2);
        assert_eq!(chick_gain(&spec, 8, 9), 1);
    }

    fn edges_of(chain: &WeightedMarkovChain, src: &str) -> Vec<(String, Rational, i64)> {
        chain
            .edges
            .iter()
            .filter(|e| e.src == src)
            .map(|e| (e.dst.clone(), e.prob.clone(), e.weight))
            .collect()
    }

    #[test]
    fn compiled_simplified_edges() {
        let chain = compile_game(&builtin_game("simplified").unwrap()).unwrap();
        let third = rat(1, 3).unwrap();
        assert_eq!(chain.transient, vec!["1", "3", "4", "6", "8"]);
        assert_eq!(chain.absorbing, vec!["9"]);
        assert_eq!(chain.support, Support { min: 0, max: 8 });
        let mut four = edges_of(&chain, "4");
        four.sort();
        assert_eq!(
            four,
            vec![
                ("4".into(), third.clone(), -1),
                ("6".into(), third.clone(), 3),
                ("8".into(), third.clone(), 4),
            ]
        );
        assert_eq!(
            edges_of(&chain, "8"),
            vec![("8".into(), third, -1), ("9".into(), rat(2, 3).unwrap(), 1)]
        );
        assert!(chain.validate().is_empty());
    }

    #[test]
    fn unmerged_compilation_keeps_parallel_edges() {
        let spec = builtin_game("simplified").unwrap();
        let chain = compile_game_with(&spec, CompileOptions { merge_parallel: false }).unwrap();
        assert_eq!(edges_of(&chain, "8").len(), 3);
        assert!(chain.validate().is_empty());
    }

    #[test]
    fn full_board_state_count() {
        let chain = compile_game(&builtin_game("full").unwrap()).unwrap();
        // start plus the 29 labeled squares among the 40 printed entries
        assert_eq!(chain.transient.len(), 30);
        assert_eq!(chain.absorbing, vec!["41"]);
        assert_eq!(chain.shortest_absorption("1"), Some(6));
    }

    #[test]
    fn edge_weights_are_positive_except_fox() {
        for name in ["simplified", "full"] {
            let chain = compile_game(&builtin_game(name).unwrap()).unwrap();
            for edge in &chain.edges {
                if edge.src == edge.dst {
                    assert_eq!(edge.weight, -1);
                } else {
                    assert!(edge.weight >= 1);
                }
            }
        }
    }
}
