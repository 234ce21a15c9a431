// README lint: every claimed number is backed by a fixture or an acceptance criterion.
#include <gtest/gtest.h>

#include <fstream>
#include <regex>

#include "support.hpp"

namespace {

struct Claim {
  std::string text, value, backing;
  std::size_t line = 0;
};

struct Readme {
  std::vector<Claim> claims;
  std::vector<std::pair<std::size_t, std::string>> prose;  // outside code blocks and the claims table
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t`");
  const auto e = s.find_last_not_of(" \t`");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> cells(const std::string& row) {
  std::vector<std::string> out;
  std::size_t start = row.find('|') + 1;
  for (std::size_t bar; (bar = row.find('|', start)) != std::string::npos; start = bar + 1) {
    out.push_back(trim(row.substr(start, bar - start)));
  }
  return out;
}

Readme load() {
  std::ifstream in(asmlp::test::source_root() / "README.md");
  EXPECT_TRUE(in) << "README.md missing";
  Readme r;
  bool code = false, table = false;
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) {
    ++n;
    if (line.rfind("```", 0) == 0) {
      code = !code;
      continue;
    }
    if (code) continue;
    if (line.rfind("## ", 0) == 0) table = line == "## Claims";
    if (table && line.rfind("|", 0) == 0) {
      const auto c = cells(line);
      if (c.size() == 3 && c[0] != "Claim" && c[0].find("---") == std::string::npos) {
        r.claims.push_back({c[0], c[1], c[2], n});
      }
      continue;
    }
    r.prose.emplace_back(n, line);
  }
  return r;
}

}  // namespace

TEST(Readme, HasClaimsTable) { EXPECT_GE(load().claims.size(), 10u); }

TEST(Readme, EveryClaimHasExistingBacking) {
  static const std::regex criterion(R"(acceptance criterion ([0-9]+))");
  for (const auto& c : load().claims) {
    std::smatch m;
    if (std::regex_match(c.backing, m, criterion)) {
      const int k = std::stoi(m[1]);
      EXPECT_TRUE(k >= 1 && k <= 10) << "line " << c.line << ": no criterion " << k;
    } else if (c.backing.rfind("fixtures/", 0) == 0) {
      EXPECT_TRUE(std::filesystem::exists(asmlp::test::source_root() / c.backing / "expected"))
          << "line " << c.line << ": " << c.backing;
    } else {
      ADD_FAILURE() << "line " << c.line << ": orphan claim '" << c.text << "' backed by '" << c.backing << "'";
    }
  }
}

TEST(Readme, ProseNumbersAppearInClaims) {
  const auto r = load();
  // Quantities with a unit: 28.28M, 4.35G, 115,605,504 MACs, 0.95 accuracy and the like.
  static const std::regex quantity(R"(([0-9][0-9,]*(\.[0-9]+)?)\s?(M|G|MACs|params)\b)");
  for (const auto& [n, line] : r.prose) {
    for (auto it = std::sregex_iterator(line.begin(), line.end(), quantity); it != std::sregex_iterator(); ++it) {
      const std::string num = (*it)[1];
      bool backed = false;
      for (const auto& c : r.claims) backed = backed || c.value.find(num) != std::string::npos;
      EXPECT_TRUE(backed) << "line " << n << ": '" << it->str() << "' is not in the claims table";
    }
  }
}
