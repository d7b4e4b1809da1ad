int main(void) {
  __asm__("not_an_instruction %eax");
  return 0;
}
