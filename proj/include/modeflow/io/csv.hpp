#pragma once

// Minimal numeric CSV: one header row, comma separated, shortest round-trip
// number formatting so files are byte-stable across runs.

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "modeflow/core/error.hpp"

namespace modeflow::io {

inline std::string format_number(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    if (r.ec != std::errc()) throw Error("format_number: conversion failed");
    return std::string(buf, r.ptr);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }

    void add_column(std::string name, std::vector<double> values)
    {
        if (!columns.empty() && values.size() != rows()) throw ShapeError("Table: column '" + name + "' has the wrong length");
        header.push_back(std::move(name));
        columns.push_back(std::move(values));
    }

    const std::vector<double>& column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return columns[i];
        throw DataError("Table: missing column '" + name + "'");
    }
};

inline std::string to_csv(const Table& t)
{
    std::string out;
    for (std::size_t c = 0; c < t.header.size(); ++c) out += (c ? "," : "") + t.header[c];
    out += '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (c) out += ',';
            out += format_number(t.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error("write to '" + path + "' failed");
}

inline std::string read_text(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Table parse_csv(const std::string& text, const std::string& origin = "csv")
{
    Table t;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) {
            const auto a = cell.find_first_not_of(" \t\r"), b = cell.find_last_not_of(" \t\r");
            cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
        }
        return cells;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        const auto cells = split(line);
        if (t.header.empty()) {
            t.header = cells;
            t.columns.assign(cells.size(), {});
            continue;
        }
        if (cells.size() != t.header.size())
            throw DataError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) + " fields");
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto* b = cells[c].data();
            const auto r = std::from_chars(b, b + cells[c].size(), v);
            if (r.ec != std::errc() || r.ptr != b + cells[c].size())
                throw DataError(origin + ":" + std::to_string(line_no) + ": '" + cells[c] + "' is not a number");
            t.columns[c].push_back(v);
        }
    }
    if (t.header.empty()) throw DataError(origin + ": no header row");
    return t;
}

inline Table read_csv(const std::string& path) { return parse_csv(read_text(path), path); }

} // namespace modeflow::io
