#pragma once

#include <string>
#include <vector>

namespace substory {

// Built-in English stopword list (174 words), also shipped as
// data/stopwords_en.txt. Override per run via PreprocessOptions or the CLI.
const std::vector<std::string>& default_stopwords();

// One word per line; blank lines ignored. Throws on unreadable file.
std::vector<std::string> load_stopwords(const std::string& path);

// Resolution order: explicit path, then the SUBSTORY_STOPWORDS environment
// variable, then the built-in list.
std::vector<std::string> resolve_stopwords(const std::string& explicit_path = "");

}  // namespace substory
