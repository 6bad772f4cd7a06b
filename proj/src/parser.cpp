#include "gridground/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "gridground/errors.hpp"

namespace gridground {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Verb: return "Verb";
    case TokenKind::Determiner: return "Det";
    case TokenKind::Adjective: return "Adj";
    case TokenKind::Noun: return "Noun";
    case TokenKind::Preposition: return "Prep";
    case TokenKind::Pronoun: return "Pronoun";
    case TokenKind::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || ch == '-') {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

struct Entry {
  TokenKind kind;
  std::string symbol;
  int index;
};

using Lexicon = std::map<std::vector<std::string>, Entry>;

Lexicon build_lexicon(const Vocabulary& vocab) {
  Lexicon lex;
  auto add = [&lex](std::string_view phrase, Entry e) { lex.emplace(split_words(phrase), std::move(e)); };
  // Earlier additions win on exact collisions; content words first.
  for (std::size_t i = 0; i < vocab.nouns().size(); ++i) {
    add(vocab.nouns()[i], {TokenKind::Noun, vocab.nouns()[i], static_cast<int>(i)});
  }
  for (std::size_t i = 0; i < vocab.adjectives().size(); ++i) {
    add(vocab.adjectives()[i], {TokenKind::Adjective, vocab.adjectives()[i], static_cast<int>(i)});
  }
  for (std::size_t i = 0; i < vocab.prepositions().size(); ++i) {
    const auto& p = vocab.prepositions()[i];
    add(p.surface, {TokenKind::Preposition, p.symbol, static_cast<int>(i)});
  }
  for (const auto& entry : vocab.verbs()) {
    add(entry.first, {TokenKind::Verb, entry.first, -1});
  }
  for (const char* d : {"the", "a", "an"}) add(d, {TokenKind::Determiner, d, -1});
  add("it", {TokenKind::Pronoun, "it", -1});
  return lex;
}

std::string join(const std::vector<std::string>& words, std::size_t from, std::size_t n) {
  std::string s;
  for (std::size_t i = from; i < from + n; ++i) {
    if (i > from) s += ' ';
    s += words[i];
  }
  return s;
}

class Parser {
 public:
  Parser(const std::vector<Token>& tokens) : toks_(tokens) {}

  ProgramGraph run(const Vocabulary& vocab) {
    for (const auto& t : toks_) {
      if (t.kind == TokenKind::Unknown) throw Error(ErrorCode::UnknownWord, "unknown word '" + t.surface + "'");
    }
    const bool has_verb =
        std::any_of(toks_.begin(), toks_.end(), [](const Token& t) { return t.kind == TokenKind::Verb; });
    if (!has_verb) throw Error(ErrorCode::NoVerb, "instruction has no verb");
    if (toks_.front().kind != TokenKind::Verb) fail("instruction must start with its verb");
    const VerbClass cls = verb_class(toks_.front(), vocab);
    pos_ = 1;
    if (cls == VerbClass::PickLike) {
      const int np = noun_phrase(true);
      b_.locate(np);
    } else {
      int source;
      if (peek(TokenKind::Pronoun)) {
        ++pos_;
        source = b_.held();
      } else {
        source = b_.locate(noun_phrase(false));
      }
      if (!peek(TokenKind::Preposition)) fail("put instruction needs a preposition");
      const std::string prep = toks_[pos_++].symbol;
      const int referent = noun_phrase(true);
      b_.position(prep, source, referent);
    }
    if (pos_ != toks_.size()) fail("unexpected '" + toks_[pos_].surface + "'");
    ProgramGraph g = std::move(b_).build();
    g.validate();
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::MalformedPhrase, what); }

  bool peek(TokenKind k) const { return pos_ < toks_.size() && toks_[pos_].kind == k; }

  int noun_phrase(bool allow_pp) {
    if (pos_ >= toks_.size()) fail("missing noun phrase");
    if (peek(TokenKind::Determiner)) ++pos_;
    int core = -1;
    while (peek(TokenKind::Adjective)) {
      const int d = b_.detect(toks_[pos_++].symbol);
      core = core < 0 ? d : b_.conj(core, d);
    }
    if (!peek(TokenKind::Noun)) {
      fail(pos_ < toks_.size() ? "expected a noun at '" + toks_[pos_].surface + "'" : "dangling determiner or adjective");
    }
    const int noun = b_.detect(toks_[pos_++].symbol);
    core = core < 0 ? noun : b_.conj(core, noun);
    if (allow_pp && peek(TokenKind::Preposition)) {
      const std::string prep = toks_[pos_++].symbol;
      if (pos_ >= toks_.size()) fail("preposition '" + prep + "' has no object");
      const int referent = noun_phrase(true);
      core = b_.conj(core, b_.shift(prep, referent));
    }
    return core;
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  GraphBuilder b_;
};

}  // namespace

VerbClass verb_class(const Token& verb, const Vocabulary& vocab) {
  auto it = vocab.verbs().find(verb.symbol);
  if (it == vocab.verbs().end()) throw Error(ErrorCode::NoVerb, "'" + verb.surface + "' is not a verb");
  return it->second;
}

std::vector<Token> tokenize(std::string_view text, const Vocabulary& vocab) {
  const Lexicon lex = build_lexicon(vocab);
  std::size_t longest = 1;
  for (const auto& [words, e] : lex) longest = std::max(longest, words.size());

  const auto words = split_words(text);
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < words.size()) {
    bool matched = false;
    for (std::size_t n = std::min(longest, words.size() - i); n >= 1; --n) {
      std::vector<std::string> key(words.begin() + static_cast<long>(i), words.begin() + static_cast<long>(i + n));
      auto it = lex.find(key);
      if (it == lex.end()) continue;
      out.push_back(Token{join(words, i, n), it->second.kind, it->second.symbol, it->second.index});
      i += n;
      matched = true;
      break;
    }
    if (!matched) {
      out.push_back(Token{words[i], TokenKind::Unknown, {}, -1});
      ++i;
    }
  }
  return out;
}

ProgramGraph parse(std::string_view text, const Vocabulary& vocab) {
  const auto tokens = tokenize(text, vocab);
  if (tokens.empty()) throw Error(ErrorCode::NoVerb, "empty instruction");
  return Parser(tokens).run(vocab);
}

}  // namespace gridground
