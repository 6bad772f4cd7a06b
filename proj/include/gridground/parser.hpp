#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "gridground/program.hpp"
#include "gridground/world.hpp"

namespace gridground {

enum class TokenKind { Verb, Determiner, Adjective, Noun, Preposition, Pronoun, Unknown };

std::string_view to_string(TokenKind kind);

struct Token {
  std::string surface;
  TokenKind kind = TokenKind::Unknown;
  std::string symbol;  // canonical verb form, preposition symbol, noun or adjective
  int index = -1;      // vocabulary index where one exists
  bool operator==(const Token&) const = default;
};

/// Lowercases, strips punctuation, and segments with longest match against
/// the multiword lexicon entries. Never fails; unknown words become Unknown.
std::vector<Token> tokenize(std::string_view text, const Vocabulary& vocab);

/// Compiles an instruction using the grammar
///
///   INSTR := PICKVERB NP | PUTVERB (it | NPCORE) PREP NP
///   NP    := DET? ADJ* NOUN (PREP NP)?
///   NPCORE:= DET? ADJ* NOUN
///
/// Prepositional phrases attach to the nearest preceding noun. Throws NoVerb,
/// UnknownWord or MalformedPhrase.
ProgramGraph parse(std::string_view text, const Vocabulary& vocab);

VerbClass verb_class(const Token& verb, const Vocabulary& vocab);

}  // namespace gridground
