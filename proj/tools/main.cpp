/* Copyright (c) 2026 The Ananke Authors. All rights reserved.
 *
 * This source code is licensed under Apache 2.0 License.
 */

#include <iostream>

#include "ananke/cli.hpp"

int main(int argc, char** argv) { return ananke::run_cli(argc, argv, std::cout, std::cerr); }
