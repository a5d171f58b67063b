// Builds the bundled two-table MRO fixture database from a SQL script.
// Usage: mkfixturedb <script.sql> <out.sqlite>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sqleval/error.hpp"
#include "sqleval/exec.hpp"

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <script.sql> <out.sqlite>\n", argv[0]);
        return 1;
    }
    try {
        std::ifstream in(argv[1]);
        if (!in) {
            std::fprintf(stderr, "cannot open %s\n", argv[1]);
            return 1;
        }
        std::ostringstream buf;
        buf << in.rdbuf();

        std::filesystem::remove(argv[2]);
        sqleval::Database db = sqleval::Database::open_read_write(argv[2]);
        db.exec_script(buf.str());
        std::printf("wrote %s\n", argv[2]);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
