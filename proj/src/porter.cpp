#include "substory/porter.hpp"

#include <algorithm>

namespace substory {
namespace {

// Working buffer for a single stemming pass. b[0..k] is the current word.
struct Stemmer {
  std::string b;
  int k = 0;
  int j = 0;

  bool cons(int i) const {
    switch (b[static_cast<std::size_t>(i)]) {
      case 'a':
      case 'e':
      case 'i':
      case 'o':
      case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // number of consonant-vowel sequences in b[0..j]
  int m() const {
    int n = 0;
    int i = 0;
    for (;;) {
      if (i > j) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool doublec(int i) const {
    if (i < 1) return false;
    if (b[static_cast<std::size_t>(i)] != b[static_cast<std::size_t>(i - 1)]) return false;
    return cons(i);
  }

  // b[i-2..i] is consonant-vowel-consonant and the last consonant is not w, x, y
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    const char ch = b[static_cast<std::size_t>(i)];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    const int len = static_cast<int>(s.size());
    if (s[s.size() - 1] != b[static_cast<std::size_t>(k)]) return false;
    if (len > k + 1) return false;
    if (b.compare(static_cast<std::size_t>(k - len + 1), s.size(), s) != 0) return false;
    j = k - len;
    return true;
  }

  void setto(std::string_view s) {
    b.replace(static_cast<std::size_t>(j + 1), static_cast<std::size_t>(k - j), s);
    k = j + static_cast<int>(s.size());
  }

  void r(std::string_view s) {
    if (m() > 0) setto(s);
  }

  // plurals and -ed / -ing
  void step1ab() {
    if (b[static_cast<std::size_t>(k)] == 's') {
      if (ends("sses")) {
        k -= 2;
      } else if (ends("ies")) {
        setto("i");
      } else if (b[static_cast<std::size_t>(k - 1)] != 's') {
        --k;
      }
    }
    if (ends("eed")) {
      if (m() > 0) --k;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k = j;
      if (ends("at")) {
        setto("ate");
      } else if (ends("bl")) {
        setto("ble");
      } else if (ends("iz")) {
        setto("ize");
      } else if (doublec(k)) {
        --k;
        const char ch = b[static_cast<std::size_t>(k)];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k;
      } else if (m() == 1 && cvc(k)) {
        setto("e");
      }
    }
  }

  // terminal y -> i when there is another vowel in the stem
  void step1c() {
    if (ends("y") && vowel_in_stem()) b[static_cast<std::size_t>(k)] = 'i';
  }

  void step2() {
    switch (b[static_cast<std::size_t>(k - 1)]) {
      case 'a':
        if (ends("ational")) {
          r("ate");
        } else if (ends("tional")) {
          r("tion");
        }
        break;
      case 'c':
        if (ends("enci")) {
          r("ence");
        } else if (ends("anci")) {
          r("ance");
        }
        break;
      case 'e':
        if (ends("izer")) r("ize");
        break;
      case 'l':
        if (ends("bli")) {
          r("ble");
        } else if (ends("alli")) {
          r("al");
        } else if (ends("entli")) {
          r("ent");
        } else if (ends("eli")) {
          r("e");
        } else if (ends("ousli")) {
          r("ous");
        }
        break;
      case 'o':
        if (ends("ization")) {
          r("ize");
        } else if (ends("ation")) {
          r("ate");
        } else if (ends("ator")) {
          r("ate");
        }
        break;
      case 's':
        if (ends("alism")) {
          r("al");
        } else if (ends("iveness")) {
          r("ive");
        } else if (ends("fulness")) {
          r("ful");
        } else if (ends("ousness")) {
          r("ous");
        }
        break;
      case 't':
        if (ends("aliti")) {
          r("al");
        } else if (ends("iviti")) {
          r("ive");
        } else if (ends("biliti")) {
          r("ble");
        }
        break;
      case 'g':
        if (ends("logi")) r("log");
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b[static_cast<std::size_t>(k)]) {
      case 'e':
        if (ends("icate")) {
          r("ic");
        } else if (ends("ative")) {
          r("");
        } else if (ends("alize")) {
          r("al");
        }
        break;
      case 'i':
        if (ends("iciti")) r("ic");
        break;
      case 'l':
        if (ends("ical")) {
          r("ic");
        } else if (ends("ful")) {
          r("");
        }
        break;
      case 's':
        if (ends("ness")) r("");
        break;
      default:
        break;
    }
  }

  void step4() {
    switch (b[static_cast<std::size_t>(k - 1)]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance") || ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able") || ends("ible")) break;
        return;
      case 'n':
        if (ends("ant") || ends("ement") || ends("ment") || ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") &&
            (b[static_cast<std::size_t>(j)] == 's' || b[static_cast<std::size_t>(j)] == 't')) {
          break;
        }
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate") || ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (m() > 1) k = j;
  }

  // final -e and -ll tidy-up
  void step5() {
    j = k;
    if (b[static_cast<std::size_t>(k)] == 'e') {
      const int a = m();
      if (a > 1 || (a == 1 && !cvc(k - 1))) --k;
    }
    if (b[static_cast<std::size_t>(k)] == 'l' && doublec(k) && m() > 1) --k;
  }
};

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  if (!std::all_of(word.begin(), word.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    return std::string(word);
  }
  Stemmer s;
  s.b = std::string(word);
  s.k = static_cast<int>(word.size()) - 1;
  s.step1ab();
  s.step1c();
  s.step2();
  s.step3();
  s.step4();
  s.step5();
  s.b.resize(static_cast<std::size_t>(s.k + 1));
  return s.b;
}

}  // namespace substory
