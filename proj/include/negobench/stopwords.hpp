#pragma once

// Built-in stopword lists; data/stopwords/*.txt carries the same words.

#include <string>
#include <vector>

namespace negobench::stopwords {

inline const std::vector<std::string>& en() {
  static const std::vector<std::string> words = {
      "the", "and", "is", "are", "was", "were", "be", "been", "of", "to", "in", "that", "it", "for", "on",
      "with", "as", "this", "by", "at", "from", "or", "an", "not", "but", "have", "has", "had", "they", "we",
      "you", "he", "she", "his", "her", "their", "our", "which", "what", "who", "would", "will", "can", "could",
      "should", "if", "then", "there", "so", "do", "does", "my", "me", "than", "its", "all", "any", "some",
      "more", "most", "other", "also", "only", "into", "about", "these", "those", "because",
  };
  return words;
}

inline const std::vector<std::string>& de() {
  static const std::vector<std::string> words = {
      "der", "die", "das", "und", "ist", "sind", "nicht", "ein", "eine", "einen", "dem", "den", "des", "zu",
      "mit", "auf", "für", "von", "sich", "auch", "es", "ich", "wir", "sie", "du", "ihr", "mein", "dein",
      "unser", "aber", "oder", "wenn", "dann", "noch", "nur", "wie", "was", "wer", "kann", "können", "sollte",
      "muss", "müssen", "haben", "hat", "habe", "wird", "werden", "war", "bei", "nach", "aus", "über", "diese",
      "dieser", "dieses", "weil", "dass", "schon", "sehr", "mehr", "hier",
  };
  return words;
}

inline const std::vector<std::string>& it() {
  static const std::vector<std::string> words = {
      "il", "lo", "la", "gli", "le", "di", "del", "della", "dei", "delle", "che", "è", "sono", "non", "un",
      "una", "uno", "per", "con", "su", "da", "dal", "alla", "al", "nel", "nella", "ma", "anche", "come",
      "questo", "questa", "questi", "quello", "io", "noi", "voi", "loro", "mio", "tuo", "nostro", "se", "poi",
      "ancora", "solo", "più", "molto", "può", "possiamo", "dobbiamo", "deve", "abbiamo", "ha", "hanno",
      "essere", "stato", "perché", "quindi", "cosa", "chi", "qui",
  };
  return words;
}

}  // namespace negobench::stopwords
