// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/cli.hpp"

int main(int argc, char** argv) { return remix3d::run_cli(argc, argv); }
