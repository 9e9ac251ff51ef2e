function selfTest() {
  return eval('1 + 1') === 2;
}

selfTest();
