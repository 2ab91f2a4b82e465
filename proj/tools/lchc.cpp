#include "lchc/driver.hpp"

int main(int argc, char **argv) { return lchc::cli(argc, argv); }
