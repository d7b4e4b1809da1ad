int table[4] = {1, 2, 3, 4};
int main(void) {
  volatile int idx = 4;
  return table[idx];
}
