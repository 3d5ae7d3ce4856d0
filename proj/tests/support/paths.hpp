// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef COVLOOP_CORPUS_DIR
#define COVLOOP_CORPUS_DIR "corpus"
#endif
#ifndef COVLOOP_TESTDATA_DIR
#define COVLOOP_TESTDATA_DIR "tests/data"
#endif
#ifndef COVLOOP_BIN
#define COVLOOP_BIN "covloop"
#endif

namespace testpaths {

inline std::string corpus(const std::string& file) {
    return std::string(COVLOOP_CORPUS_DIR) + "/" + file;
}

inline std::string data(const std::string& file) {
    return std::string(COVLOOP_TESTDATA_DIR) + "/" + file;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline std::vector<std::string> corpus_files() {
    return {corpus("alu.v"),  corpus("counter3.v"), corpus("fsm4.v"),
            corpus("handshake.v"), corpus("mux2.v"), corpus("selector.v")};
}

} // namespace testpaths
