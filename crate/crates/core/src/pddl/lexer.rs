//! Tokenizer for PDDL s-expressions with source positions.

use super::PddlError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    /// Any word: names, `:keywords`, `?variables`, the `-` type separator.
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    pub col: u32,
}

/// Splits the input into tokens, dropping `;` comments and normalizing
/// words to lower case.
pub fn tokenize(text: &str) -> Result<Vec<Token>, PddlError> {
    let mut tokens = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => {
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    line,
                    col,
                });
                chars.next();
                col += 1;
            }
            ')' => {
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    line,
                    col,
                });
                chars.next();
                col += 1;
            }
            _ => {
                let start_line = line;
                let start_col = col;
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    word.push(c.to_ascii_lowercase());
                    chars.next();
                    col += 1;
                }
                if word.chars().any(|c| c.is_control()) {
                    return Err(PddlError::Syntax {
                        line: start_line,
                        col: start_col,
                        message: format!("invalid characters in token {word:?}"),
                    });
                }
                tokens.push(Token {
                    kind: TokenKind::Word(word),
                    line: start_line,
                    col: start_col,
                });
            }
        }
    }
    Ok(tokens)
}
